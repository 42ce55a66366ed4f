//! Scale-invariant quantities, test functions, the local energy inequality,
//! entropy norms and the constants of the regularity criteria.

pub mod apriori;
pub mod constants;
pub mod energy;
pub mod entropy;
pub mod quantities;
pub mod test_function;
