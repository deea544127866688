pub mod ast;
pub mod parser;
pub mod qmath;
pub mod typecheck;
pub mod operational;
pub mod denotational;
pub mod json;
pub mod verify;
pub mod cli;
