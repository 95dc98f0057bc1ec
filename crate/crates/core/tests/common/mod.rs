#![allow(dead_code)]

pub mod tknn;
