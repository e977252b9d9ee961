use proptest::prelude::*;
use radar_vitals::rvds::{Array, Data};

fn dims() -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::vec(0u64..5, 0..=4)
}

fn array() -> impl Strategy<Value = Array> {
    (dims(), 0u8..3).prop_flat_map(|(dims, code)| {
        let n = dims.iter().product::<u64>() as usize;
        let data = match code {
            0 => proptest::collection::vec(any::<f32>(), n).prop_map(Data::F32).boxed(),
            1 => proptest::collection::vec(any::<f64>(), n).prop_map(Data::F64).boxed(),
            _ => proptest::collection::vec(any::<[f32; 2]>(), n)
                .prop_map(Data::Complex64)
                .boxed(),
        };
        data.prop_map(move |data| Array::new(dims.clone(), data).unwrap())
    })
}

fn bits(a: &Array) -> Vec<u64> {
    match &a.data {
        Data::F32(v) => v.iter().map(|x| u64::from(x.to_bits())).collect(),
        Data::F64(v) => v.iter().map(|x| x.to_bits()).collect(),
        Data::Complex64(v) => v
            .iter()
            .flat_map(|[r, i]| [u64::from(r.to_bits()), u64::from(i.to_bits())])
            .collect(),
    }
}

proptest! {
    #[test]
    fn round_trip_is_bit_exact(a in array()) {
        let mut buf = Vec::new();
        a.write_to(&mut buf).unwrap();
        let header = 8 + 8 * a.dims.len();
        prop_assert_eq!(buf.len(), header + a.data.dtype().size() * a.data.len());
        let b = Array::read_from(&buf[..]).unwrap();
        prop_assert_eq!(&a.dims, &b.dims);
        prop_assert_eq!(a.data.dtype(), b.data.dtype());
        prop_assert_eq!(bits(&a), bits(&b));
    }
}

#[test]
fn scalar_has_no_dims() {
    let a = Array::f64(&[], vec![2.5]).unwrap();
    let mut buf = Vec::new();
    a.write_to(&mut buf).unwrap();
    assert_eq!(buf.len(), 16);
    assert_eq!(Array::read_from(&buf[..]).unwrap(), a);
}

#[test]
fn trailing_bytes_are_rejected() {
    let mut buf = Vec::new();
    Array::f64(&[1], vec![1.0]).unwrap().write_to(&mut buf).unwrap();
    buf.push(0);
    assert!(Array::read_from(&buf[..]).is_err());
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.rvds");
    let a = Array::f64(&[2, 3], (0..6).map(f64::from).collect()).unwrap();
    a.save(&path).unwrap();
    assert_eq!(Array::load(&path).unwrap(), a);
}
