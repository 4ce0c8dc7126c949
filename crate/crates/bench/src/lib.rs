//! Shared inputs for the benchmarks.

use qbath_core::{dirac_law, haar_law, EnergyLaw, Spectrum};

/// Unit-gap two-level spectrum.
pub fn two_level() -> Spectrum {
    "0,1".parse().expect("valid spectrum")
}

/// Eight unevenly spaced levels, the largest Haar density in the tests.
pub fn eight_level() -> Spectrum {
    "-1.3,-0.7,-0.2,0.1,0.45,0.9,1.6,2.2".parse().expect("valid spectrum")
}

pub fn laws(spectrum: &Spectrum) -> [(&'static str, EnergyLaw); 2] {
    [("dirac", dirac_law(spectrum)), ("haar", haar_law(spectrum))]
}
