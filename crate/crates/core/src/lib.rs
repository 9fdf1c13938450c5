//! Transmit beam design for an access point that serves one communication
//! user while reading a passive backscattering RFID tag.
//!
//! The crate covers the whole chain:
//!
//! * [`scene`]: array geometry, line-of-sight channels and the link budget,
//! * [`sinr`]: tag, reader and user SINRs of a beam pair,
//! * [`zf`]: zero-forcing directions with an exact power allocation,
//! * [`joint`]: the joint design as a second-order cone program, solved
//!   through [`conic`],
//! * [`experiments`]: detection distance, coverage, power and beam-pattern
//!   sweeps with their CSV outputs.
//!
//! ```
//! use backscatter_isac::scene::{ArrayConfig, LinkBudget, Position, Scene};
//! use backscatter_isac::zf::solve_zf;
//!
//! let params = LinkBudget::default().params().unwrap();
//! let array = ArrayConfig::half_wavelength(4).unwrap();
//! let tag = Position::from_bearing(90f64.to_radians(), 6.0);
//! let user = Position::from_bearing(135f64.to_radians(), 5.0);
//! let channels = Scene::new(array, tag, user).unwrap().channels().unwrap();
//! let zf = solve_zf(&channels, &params).unwrap();
//! assert!(zf.allocation.feasible);
//! assert!(zf.allocation.total() < params.total_power);
//! ```

pub mod conic;
pub mod error;
pub mod experiments;
pub mod joint;
pub mod scene;
pub mod sinr;
pub mod units;
pub mod zf;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scene.md")]
    mod scene {}
    #[doc = include_str!("../../../book/src/sinr.md")]
    mod sinr {}
    #[doc = include_str!("../../../book/src/zero-forcing.md")]
    mod zero_forcing {}
    #[doc = include_str!("../../../book/src/joint-design.md")]
    mod joint_design {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/outputs.md")]
    mod outputs {}
}
