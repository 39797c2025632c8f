//! Every example under examples/ runs to completion.

#[allow(dead_code)]
#[path = "../examples/transition_matrix.rs"]
mod transition_matrix;

#[allow(dead_code)]
#[path = "../examples/entropy.rs"]
mod entropy;

#[allow(dead_code)]
#[path = "../examples/equilibrium_measure.rs"]
mod equilibrium_measure;

#[allow(dead_code)]
#[path = "../examples/beta_derivatives.rs"]
mod beta_derivatives;

#[allow(dead_code)]
#[path = "../examples/expansion_coefficients.rs"]
mod expansion_coefficients;

#[allow(dead_code)]
#[path = "../examples/wick_moments.rs"]
mod wick_moments;

#[allow(dead_code)]
#[path = "../examples/cycle_census.rs"]
mod cycle_census;

#[allow(dead_code)]
#[path = "../examples/local_limit.rs"]
mod local_limit;

#[allow(dead_code)]
#[path = "../examples/conditions.rs"]
mod conditions;

#[allow(dead_code)]
#[path = "../examples/graph_documents.rs"]
mod graph_documents;

macro_rules! runs {
    ($($m:ident),*) => {$(
        #[test]
        fn $m() {
            $m::run_example().unwrap();
        }
    )*};
}

runs!(transition_matrix, entropy, equilibrium_measure, beta_derivatives, expansion_coefficients, wick_moments, cycle_census, local_limit, conditions, graph_documents);
