//! Hitting-set optimum versus exact minimum removal on every small
//! generated instance, for every reduction family and target relation.

use itertools::Itertools;
use regionsynth::exec::Executor;
use regionsynth::reductions::{
    brute_force_min_hitting_set, generate_instance, hitting_set_from_removal,
    removal_from_hitting_set, HittingSetInstance, ReductionFamily,
};
use regionsynth::removal::apply_removal;
use regionsynth::repair::{min_removal, RepairOptions};
use regionsynth::separation::{check_property, CheckOptions};

fn instances() -> Vec<HittingSetInstance> {
    let universe = ["X0", "X1", "X2"];
    let pairs = [["X0", "X1"], ["X0", "X2"], ["X1", "X2"]];
    let mut out = Vec::new();
    for size in 0..=pairs.len() {
        for chosen in pairs.iter().combinations(size) {
            let sets: Vec<Vec<&str>> = chosen.iter().map(|p| p.to_vec()).collect();
            for lambda in [1, 2] {
                out.push(HittingSetInstance::new(&universe, &sets, lambda).unwrap());
            }
        }
    }
    out
}

#[test]
fn optimum_matches_hitting_set_on_small_instances() {
    let options = RepairOptions {
        executor: Executor::new(4),
        shrink: false,
    };
    for h in instances() {
        let z = brute_force_min_hitting_set(&h).unwrap();
        for fam in ReductionFamily::ALL {
            let (a, kappa) = generate_instance(&h, fam).unwrap();
            if !h.sets.is_empty() {
                for &target in fam.targets() {
                    assert!(check_property(&a, target.property(), &CheckOptions::default()).is_err());
                }
            }
            for &target in fam.targets() {
                let label = format!("{fam} {target} {:?} lambda={}", h.sets, h.lambda);
                let found = min_removal(&a, fam.mode(), target, kappa, &options);
                if z.len() > kappa {
                    assert!(found.is_err(), "{label}: expected no removal within budget");
                    continue;
                }
                let r = found.unwrap_or_else(|e| panic!("{label}: {e}"));
                assert_eq!(r.k(), z.len(), "{label}: removed {}", r.removed);

                let forward = removal_from_hitting_set(&h, &z, fam).unwrap();
                assert_eq!(forward.len(), z.len());
                let b = apply_removal(&a, &forward).unwrap();
                assert!(check_property(&b, target.property(), &CheckOptions::default()).is_ok(), "{label}: forward");

                let back = hitting_set_from_removal(&h, &r.removed, fam)
                    .unwrap_or_else(|e| panic!("{label}: {e} for {}", r.removed));
                assert!(back.len() <= r.k());
            }
        }
    }
}
