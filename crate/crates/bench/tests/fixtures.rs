use landau_bench::disordered;

#[test]
fn fixture_is_reproducible_and_disordered() {
    let (a, b) = (disordered(4, 1), disordered(4, 1));
    assert_eq!(a.potential, b.potential);
    assert_ne!(a.potential, disordered(4, 2).potential);
    assert!(a.potential.iter().any(|&v| v != 0.0));
    assert_eq!(a.dim(), 39 * 39);
}
