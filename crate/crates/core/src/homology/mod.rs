//! Cubical homology over GF(2), Conley index checks, and Morse reports.

mod conley;
mod cubical;
mod morse;

pub use conley::{
    conley_check, expected_betti, BettiVector, ConleyResult, ExpectedBetti, TagBetti,
};
pub use cubical::{betti, to_cubical, CubicalComplex, MAX_FACES};
pub use morse::{morse_report, MorseNode, MorseReport};
