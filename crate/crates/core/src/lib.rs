pub mod field;
pub mod poly;
pub mod logic;
pub mod solve;
pub mod translate;
pub mod dynamics;
