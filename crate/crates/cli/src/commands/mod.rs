pub mod converge;
pub mod diagnose;
pub mod evolve;
pub mod generate;
