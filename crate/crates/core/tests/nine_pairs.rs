//! The nine-pairs hitting-set example and its edge-removal gadget system.

use std::time::Instant;

use regionsynth::reductions::{
    brute_force_min_hitting_set, example_nine_pairs, generate_instance, hitting_set_from_removal,
    removal_from_hitting_set, ReductionFamily,
};
use regionsynth::removal::{apply_removal, RemovalMode};
use regionsynth::repair::{greedy_upper_bound, RepairOptions, Target};
use regionsynth::separation::{check_property, CheckOptions, Property};
use regionsynth::synthesis::{synthesized_net, verify_realization};

#[test]
fn forward_removal_realizes_the_gadget_system() {
    let h = example_nine_pairs();
    assert_eq!(brute_force_min_hitting_set(&h).unwrap().len(), 4);
    let (a, kappa) = generate_instance(&h, ReductionFamily::EdgeLangReal).unwrap();
    assert_eq!((a.num_states(), a.edges().len(), kappa), (193, 222, 4));

    let z = [0, 2, 3, 5];
    let k = removal_from_hitting_set(&h, &z, ReductionFamily::EdgeLangReal).unwrap();
    let b = apply_removal(&a, &k).unwrap();
    let start = Instant::now();
    let w = check_property(&b, Property::Both, &CheckOptions::default()).unwrap();
    eprintln!("check both: {:?}, {} regions", start.elapsed(), w.regions.len());
    let net = synthesized_net(&b, &w).unwrap();
    verify_realization(&b, &net).unwrap();
    assert_eq!(hitting_set_from_removal(&h, &k, ReductionFamily::EdgeLangReal).unwrap(), z);
}

#[test]
#[ignore = "several minutes: one full property check per candidate edge and step"]
fn greedy_bound_on_the_gadget_system() {
    let h = example_nine_pairs();
    let (a, _) = generate_instance(&h, ReductionFamily::EdgeLangReal).unwrap();
    let r = greedy_upper_bound(&a, RemovalMode::Edge, Target::Realization, &RepairOptions::default()).unwrap();
    assert!(r.k() >= 4);
}
