//! Arbitrary-precision reference evaluations for the special functions.

#![allow(dead_code)]

pub mod bigfloat;
pub mod series;
