use fourier3::fourier::DomainBox;
use fourier3::snapshot::Snapshot;
use ndarray::Array3;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::Config;

prop_compose! {
    fn snapshot()(half in prop::array::uniform3(1usize..4), a in prop::array::uniform3(-10.0f64..10.0),
                  len in prop::array::uniform3(0.1f64..30.0), mirror in prop::array::uniform3(any::<bool>()),
                  t in prop::num::f64::NORMAL, seed in any::<u64>()) -> Snapshot {
        let n = half.map(|h| 2 * h);
        let domain = DomainBox::new(a, std::array::from_fn(|d| a[d] + len[d])).unwrap();
        // Arbitrary bit patterns, including negative zero and subnormals.
        let values = Array3::from_shape_fn((n[0], n[1], n[2]), |(i, j, k)| {
            let bits = seed.rotate_left((i * 7 + j * 3 + k) as u32) ^ ((i * 131 + j * 17 + k) as u64);
            let re = f64::from_bits(bits & !(0x7ff << 52) | ((bits % 2046) << 52));
            Complex64::new(re, -re / 3.0)
        });
        Snapshot::new(domain, values, mirror, t).unwrap()
    }
}

proptest! {
    #![proptest_config(Config { cases: 64, failure_persistence: None, ..Config::default() })]

    #[test]
    fn write_read_is_bit_identical(s in snapshot()) {
        let mut bytes = Vec::new();
        s.write_to(&mut bytes).unwrap();
        let back = Snapshot::read_from(bytes.as_slice()).unwrap();
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        prop_assert_eq!(bytes, again);
        prop_assert_eq!(back.mirror(), s.mirror());
        prop_assert_eq!(back.t().to_bits(), s.t().to_bits());
    }

    #[test]
    fn truncation_is_rejected(s in snapshot(), cut in 1usize..80) {
        let mut bytes = Vec::new();
        s.write_to(&mut bytes).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(Snapshot::read_from(&bytes[..keep]).is_err());
    }
}

#[test]
fn save_and_load_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.sfs");
    let domain = DomainBox::cube(-1.0, 1.0).unwrap();
    let values = Array3::from_shape_fn((2, 4, 2), |(i, j, k)| Complex64::new(i as f64, (j * k) as f64));
    let s = Snapshot::new(domain, values, [false, true, false], 2.5).unwrap();
    s.save(&path).unwrap();
    assert_eq!(Snapshot::load(&path).unwrap(), s);
    assert!(Snapshot::load(dir.path().join("missing")).is_err());
}
