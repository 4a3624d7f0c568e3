use hapsim_core::propagation::{Environment, NtnTables};

const ANGLES: [f64; 9] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];

// reference S-band rows, typed in independently of the data file
const LOS_URBAN: [f64; 9] = [0.246, 0.386, 0.493, 0.613, 0.726, 0.805, 0.919, 0.968, 0.992];
const LOS_RURAL: [f64; 9] = [0.782, 0.869, 0.919, 0.929, 0.935, 0.940, 0.949, 0.952, 0.998];
const CLUTTER_URBAN: [f64; 9] = [34.3, 30.9, 29.0, 27.7, 26.8, 26.2, 25.8, 25.5, 25.5];
const CLUTTER_RURAL: [f64; 9] = [19.52, 18.17, 18.42, 18.28, 18.63, 17.68, 16.50, 16.30, 16.30];

#[test]
fn embedded_tables_match_reference_rows() {
    let t = NtnTables::default();
    for (i, &a) in ANGLES.iter().enumerate() {
        assert_eq!(t.los_probability(a, Environment::Urban), LOS_URBAN[i], "urban los at {a}");
        assert_eq!(t.los_probability(a, Environment::Rural), LOS_RURAL[i], "rural los at {a}");
        assert_eq!(t.clutter_loss(a, false, Environment::Urban), CLUTTER_URBAN[i], "urban clutter at {a}");
        assert_eq!(t.clutter_loss(a, false, Environment::Rural), CLUTTER_RURAL[i], "rural clutter at {a}");
        assert_eq!(t.clutter_loss(a, true, Environment::Rural), 0.0);
    }
}

#[test]
fn interpolation_between_rows() {
    let t = NtnTables::default();
    let mid = t.los_probability(35.0, Environment::Urban);
    assert!((mid - (0.493 + 0.613) / 2.0).abs() < 1e-12);
    assert_eq!(t.los_probability(5.0, Environment::Urban), 0.246);
}

#[test]
fn serialized_tables_reload_identically() {
    let t = NtnTables::default();
    assert_eq!(NtnTables::parse(&t.to_text()).unwrap(), t);
}
