//! Test functions with derivative oracles, Littlewood–Paley pieces and Besov seminorms.

mod config;
mod corpus;
mod function;
mod lp;
mod seminorm;
mod window;

pub use config::BesovConfig;
pub use corpus::{corpus, labels, member};
pub use function::{Oracle, SmoothFunction, Spectrum, ANALYTIC_ORDER};
pub use lp::{besov_seminorm_lp, lp_piece, LpRow, LpSeminorm};
pub use seminorm::{besov_seminorm_diff, delta_power, DiffSeminorm};
pub use window::{make_window, Window};
