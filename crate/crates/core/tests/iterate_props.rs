use geometa::geom::{GeodesicSpace, Norm, Point, SpaceKind, SpaceWithGeodesic};
use geometa::iterate::{detect_fixed_point, mann_iterate, verify_goebel_kirk};
use geometa::maps::{MapKind, MapUnderTest};
use proptest::prelude::*;

fn disc() -> SpaceWithGeodesic {
    SpaceWithGeodesic::new(SpaceKind::Ball {
        center: vec![0.0, 0.0],
        radius: 1.0,
        norm: Norm::L2,
    })
    .unwrap()
}

/// Nonexpansive self-maps of [-1, 1] or the unit disc, with a start point.
fn nonexpansive_case() -> impl Strategy<Value = (SpaceWithGeodesic, MapUnderTest, Point)> {
    let affine = (-1.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0).prop_map(|(scale, off, x)| {
        // keep the image inside [-1, 1]
        let offset = off * (1.0 - scale.abs());
        (
            SpaceWithGeodesic::interval(-1.0, 1.0).unwrap(),
            MapUnderTest::affine(scale, offset).unwrap(),
            Point::scalar(x),
        )
    });
    let rotation = (
        0.0f64..std::f64::consts::TAU,
        0.0f64..=1.0,
        0.0f64..=1.0,
        0.0f64..std::f64::consts::TAU,
    )
        .prop_map(|(angle, factor, rho, phi)| {
            (
                disc(),
                MapUnderTest::new(MapKind::RotationShrink {
                    center: [0.0, 0.0],
                    angle,
                    factor,
                })
                .unwrap(),
                Point::new(vec![rho * phi.cos(), rho * phi.sin()]),
            )
        });
    prop_oneof![affine, rotation]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step_equals_lambda_residual((space, map, x1) in nonexpansive_case(), lambda in 0.01f64..0.99, n in 2usize..80) {
        let tr = mann_iterate(&space, &map, &x1, lambda, n).unwrap();
        prop_assert_eq!(tr.len(), n);
        prop_assert!(tr.step_identity_defect() <= 1e-12);
        for k in 1..n {
            let d = space.dist(tr.point(k), tr.point(k + 1));
            prop_assert!((d - lambda * tr.residual(k)).abs() <= 1e-12);
        }
    }

    #[test]
    fn residuals_do_not_increase((space, map, x1) in nonexpansive_case(), lambda in 0.01f64..0.99) {
        let tr = mann_iterate(&space, &map, &x1, lambda, 60).unwrap();
        for w in tr.residuals.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{} > {}", w[1], w[0]);
        }
    }

    #[test]
    fn goebel_kirk_holds_for_nonexpansive_maps((space, map, x1) in nonexpansive_case(), lambda in 0.05f64..0.95) {
        let tr = mann_iterate(&space, &map, &x1, lambda, 40).unwrap();
        let rep = verify_goebel_kirk(&space, &tr, 1e-9).unwrap();
        prop_assert!(rep.passed(), "{rep:?}");
        prop_assert_eq!(rep.pairs_checked + rep.pairs_skipped, 40 * 39 / 2);
    }

    #[test]
    fn iterates_stay_in_the_space((space, map, x1) in nonexpansive_case(), lambda in 0.01f64..0.99) {
        let tr = mann_iterate(&space, &map, &x1, lambda, 50).unwrap();
        prop_assert!(tr.points.iter().all(|p| space.contains(p)));
    }

    #[test]
    fn fixed_point_detection_is_the_first_small_residual((space, map, x1) in nonexpansive_case(), tol in 1e-6f64..1e-1) {
        let tr = mann_iterate(&space, &map, &x1, 0.5, 60).unwrap();
        let first = tr.residuals.iter().position(|&r| r <= tol).map(|i| i + 1);
        prop_assert_eq!(detect_fixed_point(&tr, tol).map(|(n, _)| n), first);
    }
}
