pub mod exec;
pub mod fixtures;
pub mod lts;
pub mod reductions;
pub mod region;
pub mod removal;
pub mod repair;
pub mod separation;
pub mod simplex;
pub mod synthesis;
