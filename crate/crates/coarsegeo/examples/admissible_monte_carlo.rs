//! Random admissible decompositions in F2 at the computed `D`: each must be
//! a `(Lambda, 0)`-quasigeodesic and `R`-fellow-travel its geodesic.

use std::time::Instant;

use coarsegeo::admissible::{compute_constants, measure_factor_system, monte_carlo, TreeGenParams};
use coarsegeo::GroupModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> coarsegeo::Result<()> {
    let f2 = GroupModel::f2();
    let sys = measure_factor_system(&f2, 6, 1)?;
    let bundle = compute_constants(&sys.rates, 1, 0)?;
    let params = TreeGenParams { d: bundle.d, max_interior: 3, extra_len: 40, end_len: 40, q_len: 6 };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let t = Instant::now();
    let rep = monte_carlo(&f2, &params, 500, &bundle, &sys.rates, &mut rng)?;
    println!(
        "D={} R={} Lambda={} B={}: samples={} rejected={} counterexamples={} max length={} max fitted lambda={} ({:.1?})",
        bundle.d,
        bundle.r,
        bundle.big_lambda,
        bundle.b,
        rep.samples,
        rep.rejected,
        rep.counterexamples(),
        rep.max_path_len,
        rep.max_fitted_lambda,
        t.elapsed()
    );
    Ok(())
}
