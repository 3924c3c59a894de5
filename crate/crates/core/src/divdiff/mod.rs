//! Divided differences with confluent nodes and their B-spline (Peano kernel) form.

mod kernel;
mod nodes;
mod table;

pub(crate) use kernel::integrate_with;
pub use kernel::{kernel_integrate, peano_kernel, PeanoKernel};
pub use nodes::{NodeMultiset, CONFLUENCE_RTOL};
pub use table::{divided_difference, PRODUCT_GAP_RTOL, TAYLOR_SPREAD};
