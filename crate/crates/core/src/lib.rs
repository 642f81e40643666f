pub mod cli;
pub mod config;
pub mod contour;
pub mod error;
pub mod friedrichs;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod report;
pub mod riccati;
pub mod rootsolver;
pub mod schur;
pub mod verify;
