//! Estimates the intersection constants of the HNN fixture, sets the
//! stable-letter length past the truncation threshold and checks every
//! Britton-reduced word with up to three stable letters.

use std::time::Instant;

use coarsegeo::admissible::{compute_constants, measure_factor_system};
use coarsegeo::combination::{
    check_hnn_fixture, check_hnn_injectivity, estimate_hnn_kappas, hnn_threshold, HnnFixture, TruncationCheck,
};
use coarsegeo::GroupModel;

fn main() -> coarsegeo::Result<()> {
    let model = GroupModel::z2_star_z2();
    let sys = measure_factor_system(&model, 4, 1)?;
    let bundle = compute_constants(&sys.rates, 1, 3)?;
    let l = sys.rates.nu.at_u(1)? as u64 + 1;
    let kappas = estimate_hnn_kappas(&HnnFixture::standard(1), 5, 1, l)?;
    let threshold = hnn_threshold(&bundle, &kappas);
    let n = threshold as i32 + 1;
    println!("D' = {} M = {} kappa1 = {} kappa2 = {} threshold = {threshold} N = {n}", bundle.d, kappas.m, kappas.kappa1(), kappas.kappa2());
    let fx = HnnFixture::standard(n);
    let chk = check_hnn_fixture(&fx, 4);
    println!("fixture hypotheses hold: {} (min |cQ| = {})", chk.holds(), chk.min_len_cq);
    let t = Instant::now();
    let check = TruncationCheck { bundle: &bundle, d_prime: bundle.d, rates: &sys.rates };
    let rep = check_hnn_injectivity(&fx, 3, 3, Some(check))?;
    let tr = rep.truncation.as_ref().expect("truncation requested");
    println!(
        "words={} formal classes={} distinct={} collisions={} disagreements={} trivial={} parabolic={} outside H={}",
        rep.words,
        rep.formal_classes,
        rep.distinct_elements,
        rep.collisions.len(),
        rep.oracle_disagreements.len(),
        rep.trivial_words.len(),
        rep.parabolic,
        rep.parabolic_outside_h.len(),
    );
    println!(
        "truncations: admissible failures={} qg failures={} repeated targets={} min |p'|={:?} ({:.1?})",
        tr.admissible_failures.len(),
        tr.qg_failures.len(),
        tr.repeated_targets.len(),
        tr.min_p_length,
        t.elapsed()
    );
    for f in tr.admissible_failures.iter().take(5) {
        println!("  {f}");
    }
    Ok(())
}
