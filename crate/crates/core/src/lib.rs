pub mod algebra;
pub mod ball;
pub mod bound;
pub mod cm;
pub mod constants;
pub mod polygamma;
pub mod proof;
