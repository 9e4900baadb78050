//! The shared cyclic replay buffer.
//!
//! Writers need `&mut CyclicBuffer` and samplers `&CyclicBuffer`, so the
//! borrow checker already serialises appends and gives concurrent samplers
//! a consistent snapshot; the orchestrator collects episodes from parallel
//! rollouts and appends them afterwards in a fixed order.

use std::io::{self, Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envlab::{Action, ActionSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Action,
    pub env_reward: f64,
    pub next_state: Vec<f64>,
    /// True terminal (bootstrapping stops). Truncated episodes store `false`.
    pub done: bool,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("transition does not fit the buffer: {0}")]
    Dimension(String),
    #[error("insufficient experience: {have} stored, {want} requested")]
    Insufficient { have: usize, want: usize },
    #[error("buffer capacity must be positive")]
    ZeroCapacity,
    #[error("corrupt buffer dump: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Fixed-capacity FIFO of transitions; once full, each append overwrites the
/// oldest entry.
#[derive(Debug, Clone)]
pub struct CyclicBuffer {
    capacity: usize,
    obs_dim: usize,
    action_space: ActionSpace,
    storage: Vec<Transition>,
    write_cursor: usize,
    total_appends: u64,
}

impl CyclicBuffer {
    pub fn new(capacity: usize, obs_dim: usize, action_space: ActionSpace) -> Result<Self, ReplayError> {
        if capacity == 0 {
            return Err(ReplayError::ZeroCapacity);
        }
        Ok(CyclicBuffer {
            capacity,
            obs_dim,
            action_space,
            storage: Vec::with_capacity(capacity.min(1 << 16)),
            write_cursor: 0,
            total_appends: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn write_cursor(&self) -> usize {
        self.write_cursor
    }

    pub fn total_appends(&self) -> u64 {
        self.total_appends
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.action_space
    }

    fn check(&self, t: &Transition) -> Result<(), ReplayError> {
        if t.state.len() != self.obs_dim || t.next_state.len() != self.obs_dim {
            return Err(ReplayError::Dimension(format!(
                "observation length {} / {} but buffer holds {}",
                t.state.len(),
                t.next_state.len(),
                self.obs_dim
            )));
        }
        let fits = match (&self.action_space, &t.action) {
            (ActionSpace::Continuous { dim, .. }, Action::Continuous(v)) => v.len() == *dim,
            (ActionSpace::Discrete { n }, Action::Discrete(i)) => i < n,
            _ => false,
        };
        if !fits {
            return Err(ReplayError::Dimension(format!(
                "action {:?} outside {:?}",
                t.action, self.action_space
            )));
        }
        if !t.env_reward.is_finite() {
            return Err(ReplayError::Dimension("environment reward must be finite".into()));
        }
        Ok(())
    }

    pub fn append(&mut self, t: Transition) -> Result<(), ReplayError> {
        self.check(&t)?;
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.write_cursor] = t;
        }
        self.write_cursor = (self.write_cursor + 1) % self.capacity;
        self.total_appends += 1;
        Ok(())
    }

    /// `n` transitions drawn uniformly with replacement.
    pub fn sample_minibatch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Transition>, ReplayError> {
        if n == 0 || self.storage.len() < n {
            return Err(ReplayError::Insufficient {
                have: self.storage.len(),
                want: n,
            });
        }
        Ok((0..n)
            .map(|_| self.storage[rng.random_range(0..self.storage.len())].clone())
            .collect())
    }

    /// Live contents from oldest to newest.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.storage.len() < self.capacity { 0 } else { self.write_cursor };
        self.storage[split..].iter().chain(&self.storage[..split])
    }

    /// Slot-order view, as used by [`Self::sample_minibatch`] indices.
    pub fn slots(&self) -> &[Transition] {
        &self.storage
    }

    /// Mutable slot access; lets tests tamper with stored rewards.
    pub fn slots_mut(&mut self) -> &mut [Transition] {
        &mut self.storage
    }
}

// Dump layout, all integers and floats little-endian:
//   magic "LISRBUF1", u32 version
//   u64 capacity, u64 obs_dim
//   u8 action kind (0 continuous, 1 discrete), u64 dim-or-n, f64 low, f64 high
//   u64 total_appends, u64 write_cursor, u64 len
//   len records in slot order:
//     obs_dim f64 state, action (dim f64 | u64 index), f64 reward,
//     obs_dim f64 next_state, u8 done
const DUMP_MAGIC: &[u8; 8] = b"LISRBUF1";
pub const DUMP_VERSION: u32 = 1;

impl CyclicBuffer {
    pub fn dump<W: Write>(&self, mut w: W) -> Result<(), ReplayError> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        put_u64(&mut w, self.capacity as u64)?;
        put_u64(&mut w, self.obs_dim as u64)?;
        match &self.action_space {
            ActionSpace::Continuous { dim, low, high } => {
                w.write_all(&[0])?;
                put_u64(&mut w, *dim as u64)?;
                put_f64(&mut w, *low)?;
                put_f64(&mut w, *high)?;
            }
            ActionSpace::Discrete { n } => {
                w.write_all(&[1])?;
                put_u64(&mut w, *n as u64)?;
                put_f64(&mut w, 0.0)?;
                put_f64(&mut w, 0.0)?;
            }
        }
        put_u64(&mut w, self.total_appends)?;
        put_u64(&mut w, self.write_cursor as u64)?;
        put_u64(&mut w, self.storage.len() as u64)?;
        for t in &self.storage {
            t.state.iter().try_for_each(|x| put_f64(&mut w, *x))?;
            match &t.action {
                Action::Continuous(v) => v.iter().try_for_each(|x| put_f64(&mut w, *x))?,
                Action::Discrete(i) => put_u64(&mut w, *i as u64)?,
            }
            put_f64(&mut w, t.env_reward)?;
            t.next_state.iter().try_for_each(|x| put_f64(&mut w, *x))?;
            w.write_all(&[u8::from(t.done)])?;
        }
        Ok(())
    }

    pub fn restore<R: Read>(mut r: R) -> Result<Self, ReplayError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(ReplayError::Corrupt("bad magic".into()));
        }
        let mut ver = [0u8; 4];
        r.read_exact(&mut ver)?;
        if u32::from_le_bytes(ver) != DUMP_VERSION {
            return Err(ReplayError::Corrupt(format!("unsupported version {}", u32::from_le_bytes(ver))));
        }
        let capacity = get_u64(&mut r)? as usize;
        let obs_dim = get_u64(&mut r)? as usize;
        let kind = get_u8(&mut r)?;
        let size = get_u64(&mut r)? as usize;
        let (low, high) = (get_f64(&mut r)?, get_f64(&mut r)?);
        let action_space = match kind {
            0 => ActionSpace::Continuous { dim: size, low, high },
            1 => ActionSpace::Discrete { n: size },
            k => return Err(ReplayError::Corrupt(format!("unknown action kind {k}"))),
        };
        let mut buf = CyclicBuffer::new(capacity, obs_dim, action_space)?;
        buf.total_appends = get_u64(&mut r)?;
        buf.write_cursor = get_u64(&mut r)? as usize;
        let len = get_u64(&mut r)? as usize;
        if len > capacity || buf.write_cursor >= capacity {
            return Err(ReplayError::Corrupt("length or cursor exceeds capacity".into()));
        }
        let read_vec = |r: &mut R, n: usize| (0..n).map(|_| get_f64(r)).collect::<Result<Vec<_>, _>>();
        for _ in 0..len {
            let state = read_vec(&mut r, obs_dim)?;
            let action = match kind {
                0 => Action::Continuous(read_vec(&mut r, size)?),
                _ => Action::Discrete(get_u64(&mut r)? as usize),
            };
            let env_reward = get_f64(&mut r)?;
            let next_state = read_vec(&mut r, obs_dim)?;
            let done = get_u8(&mut r)? != 0;
            let t = Transition {
                state,
                action,
                env_reward,
                next_state,
                done,
            };
            buf.check(&t)?;
            buf.storage.push(t);
        }
        Ok(buf)
    }
}

fn put_u64<W: Write>(w: &mut W, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64<W: Write>(w: &mut W, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn get_u8<R: Read>(r: &mut R) -> io::Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn get_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
