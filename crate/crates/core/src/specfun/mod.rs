//! Special functions: Airy, Bessel, gamma, Kummer U and Whittaker W.
//!
//! Every routine returns its value together with an absolute error bound.

mod airy;
mod bessel;
pub(crate) mod dd;
mod gamma;
mod kummer;

pub use airy::{airy, AiryValues};
pub use bessel::{bessel_j1, bessel_jy, bessel_k, bessel_k0, bessel_k1, bessel_y1, BesselJY};
pub use gamma::{gamma, ln_gamma};
pub use kummer::{kummer_u, kummer_u_prime, whittaker_w, whittaker_w_prime};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error_bound: f64,
}
