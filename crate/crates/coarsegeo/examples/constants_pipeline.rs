//! Measures contraction, orthogonality and bounded-intersection rates on the
//! factor cosets of F2 and Z^2 * Z^2, then evaluates the constants pipeline.

use coarsegeo::admissible::{compute_constants, measure_factor_system, RateSet};
use coarsegeo::GroupModel;

fn main() -> coarsegeo::Result<()> {
    let worked = compute_constants(&RateSet::worked_example(), 1, 0)?;
    println!("worked table: A={} C={} B={} R={} Lambda={} D={}", worked.a, worked.c_const, worked.b, worked.r, worked.big_lambda, worked.d);
    for (model, radius) in [(GroupModel::f2(), 6), (GroupModel::z2_star_z2(), 4)] {
        let sys = measure_factor_system(&model, radius, 1)?;
        println!("{}: stabilized={} nu pairs={}", model.name(), sys.stabilized, sys.nu_pairs);
        println!("  rates: {}", serde_json::to_string(&sys.rates).expect("serializable"));
        for (lambda, c) in [(1, 0), (1, 3)] {
            let b = compute_constants(&sys.rates, lambda, c)?;
            println!(
                "  (lambda, c) = ({lambda}, {c}): A={} C={} B={} R={} Lambda={} D={}",
                b.a, b.c_const, b.b, b.r, b.big_lambda, b.d
            );
        }
    }
    Ok(())
}
