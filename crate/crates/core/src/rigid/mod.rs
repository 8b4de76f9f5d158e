//! Functions on wide opens of the projective line and their local models.
//!
//! [`LogSeries`] lives in one residue disc: a power series in the local
//! coordinate `t` with polynomial dependence on `l = log t`. [`RigidFunction`]
//! lives on the complement of a few residue discs and is stored through its
//! partial-fraction decomposition, one end per marked point.

mod function;
mod logseries;
mod rational;

pub use function::{from_rational, RigidFunction, RigidSpace};
pub(crate) use function::integration_loss;
pub use logseries::{LocalForm, LogSeries};
pub use rational::{QPoly, RationalFunction};

use crate::error::Result;

/// `log f` for a rational function that is `1 mod p` on the wide open.
pub fn rigid_log_unit(f: &RationalFunction, space: &std::sync::Arc<RigidSpace>, rho: f64, target: f64) -> Result<RigidFunction> {
    function::log_of_unit(f, space, rho, target)
}
