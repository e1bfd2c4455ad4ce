use germlab::constructions::{break_bridge, build_bridge, build_example1, restore_bridge};
use germlab::germ::{make_cone_sheet, GermModel};
use germlab::knots::{alexander_of_polygon, knot_table, linking_number_polygons, subdivide, Polygon};
use germlab::laurent::LaurentPoly;
use germlab::section::{gluing_tolerance, hausdorff, nesting_tree, section_at, Component, PolyLink};
use germlab::Rational;
use proptest::prelude::*;

type Vec3 = [f64; 3];

fn rotate(p: Vec3, (a, b, c): (f64, f64, f64)) -> Vec3 {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sc, cc) = c.sin_cos();
    let p = [p[0], ca * p[1] - sa * p[2], sa * p[1] + ca * p[2]];
    let p = [cb * p[0] + sb * p[2], p[1], -sb * p[0] + cb * p[2]];
    [cc * p[0] - sc * p[1], sc * p[0] + cc * p[1], p[2]]
}

fn star(radii: &[f64]) -> Vec<Vec3> {
    let n = radii.len() as f64;
    radii
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let a = std::f64::consts::TAU * k as f64 / n;
            [r * a.cos(), r * a.sin(), 0.1 * (3.0 * a).sin()]
        })
        .collect()
}

fn circle_link(circles: &[(f64, f64, f64)], affine: impl Fn([f64; 2]) -> [f64; 2]) -> PolyLink {
    let components = circles
        .iter()
        .map(|&(cx, cy, r)| Component {
            closed: true,
            points: (0..48)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / 48.0;
                    let q = affine([cx + r * a.cos(), cy + r * a.sin()]);
                    [q[0], q[1], 0.0, 1.0]
                })
                .collect(),
            tags: vec![],
        })
        .collect();
    PolyLink { t: 1.0, components, empty_sheets: vec![] }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cone_sections_scale_exactly(radii in prop::collection::vec(0.5f64..2.0, 5..24), j in 1i32..12) {
        let cone = GermModel::single(4, "C", make_cone_sheet(star(&radii), true).unwrap());
        let t = 2f64.powi(-j);
        let link = section_at(&cone, t, 64).unwrap();
        prop_assert_eq!(link.components.len(), 1);
        for (p, v) in link.components[0].points.iter().zip(star(&radii)) {
            for a in 0..3 {
                prop_assert!((p[a] - t * v[a]).abs() <= 1e-15 * t);
            }
        }
    }

    #[test]
    fn nesting_is_invariant_under_similarities(
        angle in 0.0f64..std::f64::consts::TAU,
        scale in 0.1f64..10.0,
        shift in (-5.0f64..5.0, -5.0f64..5.0),
        layout in 0usize..3,
    ) {
        let circles: &[(f64, f64, f64)] = match layout {
            0 => &[(0.0, 0.0, 2.0), (-0.8, 0.0, 0.5), (0.8, 0.0, 0.5)],
            1 => &[(0.0, 0.0, 2.0), (0.0, 0.0, 1.0), (0.0, 0.0, 0.4), (4.0, 0.0, 1.0)],
            _ => &[(-2.0, 0.0, 1.0), (2.0, 0.0, 1.0), (2.0, 0.0, 0.5)],
        };
        let (s, c) = angle.sin_cos();
        let moved = circle_link(circles, |p| {
            [scale * (c * p[0] - s * p[1]) + shift.0, scale * (s * p[0] + c * p[1]) + shift.1]
        });
        let before = nesting_tree(&circle_link(circles, |p| p)).unwrap();
        let after = nesting_tree(&moved).unwrap();
        prop_assert!(before.isomorphic(&after));
    }

    #[test]
    fn alexander_is_independent_of_position_and_projection(
        which in 0usize..3,
        rot in (0.0f64..6.3, 0.0f64..6.3, 0.0f64..6.3),
        seed in any::<u64>(),
    ) {
        let entry = &knot_table().knots[which];
        let moved: Polygon = entry.vertices.iter().map(|&v| rotate(v, rot)).collect();
        let want = LaurentPoly::from_coeffs(&entry.alexander).normalized();
        prop_assert_eq!(alexander_of_polygon(&moved, seed).unwrap(), want);
    }

    #[test]
    fn hopf_link_has_linking_number_one(rot in (0.0f64..6.3, 0.0f64..6.3, 0.0f64..6.3), seed in any::<u64>()) {
        let ring = |centre: Vec3, plane: usize| -> Polygon {
            (0..40)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / 40.0;
                    let p = if plane == 0 { [a.cos(), a.sin(), 0.0] } else { [a.cos(), 0.0, a.sin()] };
                    rotate([p[0] + centre[0], p[1] + centre[1], p[2] + centre[2]], rot)
                })
                .collect()
        };
        let lk = linking_number_polygons(&ring([0.0; 3], 0), &ring([1.0, 0.0, 0.0], 1), seed).unwrap();
        prop_assert_eq!(lk.value.abs(), 1);
        prop_assert!((lk.gauss.abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn breaking_and_restoring_a_bridge_is_the_identity(
        beta2 in 2i64..5,
        gap2 in 1i64..6,
        j in 1i32..7,
    ) {
        let beta = Rational::new(beta2, 2).unwrap();
        let q = Rational::new(beta2 + gap2, 2).unwrap();
        let p = Rational::new(2 * beta2 + gap2, 4).unwrap();
        let bridge = build_bridge(q, beta).unwrap();
        let back = restore_bridge(&break_bridge(&bridge, "A", p).unwrap(), "A").unwrap();
        let t = 2f64.powi(-j);
        let d = hausdorff(&section_at(&bridge, t, 128).unwrap(), &section_at(&back, t, 128).unwrap());
        prop_assert!(d < gluing_tolerance(t, 128));
    }
}

#[test]
fn subdivision_keeps_every_tabulated_knot() {
    for entry in &knot_table().knots {
        let fine = subdivide(&subdivide(&entry.vertices));
        assert_eq!(
            alexander_of_polygon(&fine, 3).unwrap(),
            LaurentPoly::from_coeffs(&entry.alexander).normalized(),
            "{}",
            entry.name
        );
    }
}

#[test]
fn example1_link_is_stable_under_refinement() {
    let (x1, x2) = build_example1(Rational::int(5)).unwrap();
    for m in [&x1, &x2] {
        let shapes: Vec<(usize, String)> = [128, 256, 512]
            .iter()
            .map(|&res| {
                let link = section_at(m, 0.125, res).unwrap();
                (link.closed_count(), nesting_tree(&link).unwrap().canonical())
            })
            .collect();
        assert!(shapes.iter().all(|s| *s == (3, "(()())".to_string())), "{shapes:?}");
    }
}
