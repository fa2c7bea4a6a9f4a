pub mod convert;
pub mod evaluate;
pub mod infer;
pub mod train;
pub mod windows;
