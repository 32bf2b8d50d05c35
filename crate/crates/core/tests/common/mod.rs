#![allow(dead_code)]

pub mod ctw;
pub mod oracles;
pub mod reference;
