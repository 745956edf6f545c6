//! Relative geodesics in Z^2 * Z^2: components, lifts, deep points and
//! conjugacy classification of a few elements.

use coarsegeo::coarse::deep_and_transition_points;
use coarsegeo::combination::{classify_hyperbolic, lift_coset_diam, lift_path, relative_geodesic_and_components};
use coarsegeo::{GroupModel, PeripheralCoset};

fn main() -> coarsegeo::Result<()> {
    let model = GroupModel::z2_star_z2();
    for word in ["a1^5 b1^5", "a1^2 b1 a2^-3 b2^2", "b1 a1 b1^-1", "a1 b1 a1^-1 b1^-1"] {
        let g = model.parse(word)?;
        let (rel, comps) = relative_geodesic_and_components(&model, &g);
        let lift = lift_path(&model, &rel);
        println!("{word}: {:?}", classify_hyperbolic(&model, &g));
        println!("  {} relative edges, lift length {}, components isolated: {}", rel.edges.len(), lift.len(), comps.all_isolated);
        for c in &comps.components {
            println!("  component at edge {} in {}", c.first_edge, c.coset);
        }
        let deep = deep_and_transition_points(&model, &lift, 0, 1, Some(1))?;
        let transition: Vec<usize> = deep.points.iter().filter(|p| p.transition).map(|p| p.position).collect();
        println!("  transition points at positions {transition:?}");
        if let Some(last) = g.last() {
            let target = PeripheralCoset::new(g.clone(), 1 - last.factor);
            println!("  diam(lift near the end coset, U=1) = {:?}", lift_coset_diam(&lift, &target, 1));
        }
    }
    Ok(())
}
