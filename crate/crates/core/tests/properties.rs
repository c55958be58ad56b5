use lumen::descriptor::{decode_descriptors, encode_descriptors, Descriptor, DescriptorSet};
use lumen::mining::{sphere_iou, Ball};
use lumen::photometric::{equalization_lut, equalize, histogram_of, NormalisationMethod};
use lumen::raster::{lab_to_rgb, pad_reflect_256, rgb_to_lab, unpad, Plane, RasterImage};
use lumen::retrieval::{mean_ap, ProtocolQuery, RetrievalProtocol};
use proptest::prelude::*;

fn image() -> impl Strategy<Value = RasterImage> {
    (2usize..40, 2usize..40).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h * 3)
            .prop_map(move |d| RasterImage::from_vec(w, h, 3, d).unwrap())
    })
}

fn plane() -> impl Strategy<Value = Plane> {
    (1usize..30, 1usize..30).prop_flat_map(|(w, h)| {
        proptest::collection::vec(0.0f64..=100.0, w * h).prop_map(move |d| Plane::from_vec(w, h, d).unwrap())
    })
}

fn ball() -> impl Strategy<Value = Ball> {
    ([-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0], 0.1f64..3.0).prop_map(|(c, r)| Ball::new(c, r).unwrap())
}

proptest! {
    #[test]
    fn lab_round_trip_within_one_level(img in image()) {
        let back = lab_to_rgb(&rgb_to_lab(&img).unwrap());
        for (a, b) in img.data().iter().zip(back.data()) {
            prop_assert!((i16::from(*a) - i16::from(*b)).abs() <= 1);
        }
    }

    #[test]
    fn padding_is_undone(img in image()) {
        let (p, rec) = pad_reflect_256(&img).unwrap();
        prop_assert_eq!(p.width() % 256, 0);
        prop_assert_eq!(p.height() % 256, 0);
        prop_assert_eq!(unpad(&p, &rec).unwrap(), img);
    }

    #[test]
    fn equalisation_lut_is_monotone(l in plane()) {
        if let Some(lut) = equalization_lut(&histogram_of(&l).unwrap()) {
            prop_assert!(lut.map().windows(2).all(|w| w[0] <= w[1]));
        }
        let (out, _) = equalize(&l).unwrap();
        prop_assert!(out.data().iter().all(|v| (0.0..=100.0).contains(v)));
    }

    #[test]
    fn none_is_identity(img in image()) {
        prop_assert_eq!(lumen::photometric::normalize_image(&img, &NormalisationMethod::None).unwrap(), img);
    }

    #[test]
    fn iou_is_symmetric_and_bounded(a in ball(), b in ball()) {
        let (ab, ba) = (sphere_iou(&a, &b), sphere_iou(&b, &a));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((sphere_iou(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dsc1_round_trip(rows in proptest::collection::vec(proptest::collection::vec(-1e6f32..1e6, 3), 0..20)) {
        let set = DescriptorSet::from_descriptors(
            3,
            rows.into_iter().enumerate().map(|(i, v)| Descriptor::new(format!("d{i}"), v).unwrap()),
        ).unwrap();
        prop_assert_eq!(decode_descriptors(&encode_descriptors(&set).unwrap()).unwrap(), set);
    }

    #[test]
    fn map_is_a_percentage(vals in proptest::collection::vec(proptest::collection::vec(-1.0f32..1.0, 4), 3..15), pos_mask in any::<u32>()) {
        let ids: Vec<String> = (0..vals.len()).map(|i| format!("i{i:02}")).collect();
        let positives: Vec<String> = ids[1..].iter().enumerate().filter(|(k, _)| pos_mask >> k & 1 == 1).map(|(_, id)| id.clone()).collect();
        let protocol = RetrievalProtocol::new(ids.clone(), vec![ProtocolQuery { id: ids[0].clone(), positives, junk: vec![] }]).unwrap();
        let set = DescriptorSet::from_descriptors(4, ids.iter().zip(vals).map(|(id, v)| Descriptor::new(id.clone(), v).unwrap())).unwrap();
        let r = mean_ap(&protocol, &set, &set).unwrap();
        prop_assert!((0.0..=100.0).contains(&r.map));
    }
}
