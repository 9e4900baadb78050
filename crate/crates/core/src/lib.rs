pub mod symtree;
pub mod neuronet;
pub mod envlab;
pub mod replay;
pub mod learners;
pub mod evolution;
pub mod expcli;
