//! Exact symbolic engine for Dunkl-type operators on the reflection group
//! Z2^N: a function ring with tracked denominators, a normal-ordering
//! operator algebra, constructors for the operators and models built from
//! them, and identity suites that check everything exactly.

pub mod ring;
pub mod opalg;
pub mod dunkl;
pub mod models;
pub mod verify;
