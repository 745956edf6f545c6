//! Builds normal paths for every reduced word of the amalgam fixtures at the
//! threshold `N = D + 1` and reports injectivity and quasigeodesicity.

use std::time::Instant;

use coarsegeo::admissible::{compute_constants, measure_factor_system};
use coarsegeo::combination::{check_amalgam_injectivity, AmalgamFixture};
use coarsegeo::GroupModel;

fn main() -> coarsegeo::Result<()> {
    let cases = [
        (AmalgamFixture::free as fn(i32) -> AmalgamFixture, GroupModel::f2(), 6, 6),
        (AmalgamFixture::lattice, GroupModel::z2_star_z2(), 4, 4),
    ];
    for (make, model, radius, syllables) in cases {
        let sys = measure_factor_system(&model, radius, 1)?;
        let bundle = compute_constants(&sys.rates, 1, 0)?;
        let n = bundle.d as i32 + 1;
        let fx = make(n);
        let t = Instant::now();
        let rep = check_amalgam_injectivity(&fx, 1, syllables, &bundle, &sys.rates)?;
        println!(
            "{} N={n}: words={} distinct={} collisions={} trivial={} admissible failures={} qg failures={} max fitted lambda={} hyperbolic={} parabolic={} ({:.1?})",
            model.name(),
            rep.words,
            rep.distinct_elements,
            rep.collisions.len(),
            rep.trivial_words.len(),
            rep.admissible_failures.len(),
            rep.qg_failures.len(),
            rep.max_fitted_lambda,
            rep.hyperbolic,
            rep.parabolic,
            t.elapsed()
        );
    }
    Ok(())
}
