//! Stochastic system definitions and Monte Carlo path generation.

mod ctmc;
mod io;
mod model;
mod path;

pub use ctmc::simulate_markov_chain;
pub use io::{export_pathset_csv, load_pathset, save_pathset, PATHSET_FORMAT_VERSION};
pub use model::{validate_generator, ModelKind, ModelSpec, GENERATOR_ROW_SUM_TOL};
pub use path::{generate_dataset, simulate_path, PathSet, SamplePath};
