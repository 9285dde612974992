use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::{Arc, OnceLock};

use adscurv::fuchsian::*;
use adscurv::hyp2::{comparison_angle, comparison_triangle, h2_distance, triangle_area, H2Point};
use adscurv::surface::{CConvexFunction, GeodesicMesh, InducedDistanceField, MeshParams, MeshRegion, SampleRegion};
use adscurv::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn group() -> &'static FuchsianGroup {
    static G: OnceLock<FuchsianGroup> = OnceLock::new();
    G.get_or_init(genus2_octagon_group)
}

/// Disc-model action: conjugate the upper half-plane action by the Cayley
/// map, with the disc point read as `conj((w - i)/(w + i))`.
fn disc_action(m: &Mobius, z: Complex64) -> Complex64 {
    let i = Complex64::i();
    let zc = z.conj();
    let w = i * (Complex64::new(1.0, 0.0) + zc) / (Complex64::new(1.0, 0.0) - zc);
    let a = m.matrix();
    let w2 = (a[0][0] * w + a[0][1]) / (a[1][0] * w + a[1][1]);
    ((w2 - i) / (w2 + i)).conj()
}

fn random_mobius(rng: &mut ChaCha8Rng) -> Mobius {
    let t = Mobius::translation(rng.gen_range(0.0..2.0), rng.gen_range(0.0..6.3));
    t.compose(&Mobius::rotation(rng.gen_range(0.0..3.2)))
}

#[test]
fn hyperboloid_action_matches_disc_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let m = random_mobius(&mut rng);
        assert!((m.det() - 1.0).abs() < 1e-12);
        let x = H2Point::from_polar(rng.gen_range(0.0..3.0), rng.gen_range(0.0..6.3));
        let z = x.poincare();
        let expect = disc_action(&m, Complex64::new(z[0], z[1]));
        let got = m.act(&x).poincare();
        assert!((expect.re - got[0]).abs() < 1e-10 && (expect.im - got[1]).abs() < 1e-10);
    }
}

#[test]
fn mobius_is_an_isometry_and_composes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let (a, b) = (random_mobius(&mut rng), random_mobius(&mut rng));
        let x = H2Point::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(0.0..6.3));
        let y = H2Point::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(0.0..6.3));
        assert!((h2_distance(&a.act(&x), &a.act(&y)) - h2_distance(&x, &y)).abs() < 1e-10);
        let ab = a.compose(&b).act(&x);
        let seq = a.act(&b.act(&x));
        assert!(h2_distance(&ab, &seq) < 1e-10);
        assert!(h2_distance(&a.inverse().act(&a.act(&x)), &x) < 1e-10);
    }
    assert_eq!(Mobius::new(2.0, 0.0, 0.0, 1.0), Err(Error::NotUnimodular(2.0)));
}

#[test]
fn diagonal_translates_along_axis() {
    let m = Mobius::diagonal(1.3);
    let p = m.act(&H2Point::origin());
    assert!((p.coords()[1] - 1.3f64.sinh()).abs() < 1e-12 && p.coords()[2].abs() < 1e-15);
    let r = Mobius::rotation(0.4).act(&H2Point::from_polar(1.0, 0.0));
    assert!(h2_distance(&r, &H2Point::from_polar(1.0, 0.8)) < 1e-12);
}

#[test]
fn translation_length_examples() {
    assert!((translation_length(&Mobius::diagonal(2.5)).unwrap() - 2.5).abs() < 1e-12);
    assert!(matches!(translation_length(&Mobius::identity()), Err(Error::NotHyperbolic(_))));
    assert!(matches!(translation_length(&Mobius::rotation(0.3)), Err(Error::NotHyperbolic(_))));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let g = random_mobius(&mut rng);
        let s = rng.gen_range(0.1..4.0);
        let c = g.compose(&Mobius::diagonal(s)).compose(&g.inverse());
        assert!((translation_length(&c).unwrap() - s).abs() < 1e-12);
    }
}

#[test]
fn translation_length_is_minimal_displacement() {
    // golden-section minimization of the displacement along rays, then over a
    // grid of rays
    for (k, g) in group().generators().iter().enumerate() {
        let l = translation_length(g).unwrap();
        let mut best = f64::INFINITY;
        for i in 0..720 {
            let th = i as f64 * PI / 360.0;
            let f = |r: f64| {
                let x = H2Point::from_polar(r, th);
                h2_distance(&x, &g.act(&x))
            };
            let (mut a, mut b) = (0.0, 3.0);
            let phi = 0.618_033_988_749_895;
            for _ in 0..80 {
                let (c, d) = (b - phi * (b - a), a + phi * (b - a));
                if f(c) < f(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            best = best.min(f(0.5 * (a + b)));
        }
        assert!(best >= l - 1e-9, "generator {k}: {best} < {l}");
        assert!(best - l < 1e-6, "generator {k}: {best} vs {l}");
    }
}

#[test]
fn octagon_geometry() {
    let v = octagon_vertices();
    let s = octagon_side_length();
    for i in 0..8 {
        let d = h2_distance(&v[i], &v[(i + 1) % 8]);
        assert!((d - s).abs() < 1e-10);
        let ang = comparison_angle(d, d, h2_distance(&v[(i + 7) % 8], &v[(i + 1) % 8])).unwrap();
        assert!((ang - FRAC_PI_4).abs() < 1e-10);
    }
    let o = H2Point::origin();
    let area: f64 = (0..8)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % 8]);
            triangle_area(&comparison_triangle(h2_distance(&o, &a), h2_distance(&o, &b), h2_distance(&a, &b)).unwrap())
        })
        .sum();
    assert!((area - 4.0 * PI).abs() < 1e-10);
    assert!((octagon_circumradius().cosh() - (1.0 + 2f64.sqrt()).powi(2)).abs() < 1e-12);
}

#[test]
fn generators_pair_opposite_sides() {
    let v = octagon_vertices();
    for (k, g) in group().generators().iter().enumerate() {
        // side j joins vertex j and j+1; side k+4 must land on side k
        let a = g.act(&v[k + 4]);
        let b = g.act(&v[(k + 5) % 8]);
        let hit = |p: &H2Point| [v[k], v[k + 1]].iter().any(|q| h2_distance(p, q) < 1e-9);
        assert!(hit(&a) && hit(&b), "generator {k}");
    }
}

#[test]
fn balls_are_inverse_closed_and_stable() {
    let g = group();
    let b3 = g.ball(3).unwrap();
    for m in b3.iter() {
        let inv = m.inverse();
        assert!(b3.iter().any(|n| n.projective_distance(&inv) < 1e-8));
    }
    let b4 = g.ball(4).unwrap();
    println!("ball sizes: r=3 {} r=4 {}", b3.len(), b4.len());
    assert_eq!(b3.len(), 457);
    assert_eq!(&b4[..457], &b3[..]);
    assert_eq!(b4.len(), genus2_octagon_group().ball(4).unwrap().len());
}

#[test]
fn systole_matches_construction() {
    let s = group().systole_estimate(5).unwrap();
    let expected = 2.0 * (1.0 + 2f64.sqrt()).acosh();
    assert!((s - expected).abs() < 1e-8, "{s} vs {expected}");
}

#[test]
fn displacement_bounded_below_by_systole() {
    let g = group();
    let sys = 2.0 * (1.0 + 2f64.sqrt()).acosh();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b = g.ball(3).unwrap();
    for _ in 0..100 {
        let x = H2Point::from_polar(rng.gen_range(0.0..2.4), rng.gen_range(0.0..6.3));
        for m in b.iter().skip(1) {
            assert!(h2_distance(&x, &m.act(&x)) >= sys - 1e-10);
        }
    }
}

#[test]
fn group_json_round_trip() {
    let g = group();
    let text = g.to_json();
    let back = FuchsianGroup::from_json(&text).unwrap();
    assert_eq!(back.genus(), 2);
    assert_eq!(back.relator(), g.relator());
    for (a, b) in back.generators().iter().zip(g.generators()) {
        assert!(a.projective_distance(b) < 1e-14);
    }
    assert!(text.contains("\"1 -2 3 -4 -1 2 -3 4\""));
    let bad = text.replace("\"1 -2 3 -4 -1 2 -3 4\"", "\"1 2 3 4 -1 -2 -3 -4\"");
    assert!(matches!(FuchsianGroup::from_json(&bad), Err(Error::RelatorMismatch(_))));
}

#[test]
fn orbit_envelope_matches_brute_force() {
    let g = group();
    let p = H2Point::from_polar(0.7, 1.0);
    let u = orbit_envelope(g, &[(p, 0.5)], 3).unwrap();
    let ball = g.ball(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let x = H2Point::from_polar(rng.gen_range(0.0..2.4), rng.gen_range(0.0..6.3));
        let w = ball.iter().map(|m| 0.5 * h2_distance(&x, &m.act(&p)).cosh()).fold(f64::INFINITY, f64::min);
        assert!((u.height(&x) - w.atan()).abs() < 1e-12);
    }
}

#[test]
fn invariance_checks() {
    let g = group().clone();
    let c = FuchsianCConvex::new(CConvexFunction::constant(0.4).unwrap(), g.clone(), 1e-9);
    let rep = invariance_check(&c, 200, 1);
    assert_eq!(rep.sup_violation, 0.0);
    assert!(rep.pass);

    let seeds = [(H2Point::from_polar(0.5, 2.0), 0.6), (H2Point::from_polar(1.5, 4.0), 0.9)];
    let mut prev = None;
    for r in [2, 3, 4] {
        let u = orbit_envelope(&g, &seeds, r).unwrap();
        let fc = FuchsianCConvex::new(u.clone(), g.clone(), 1e-9);
        let rep = invariance_check(&fc, 300, 2);
        println!("orbit envelope radius {r}: invariance violation {:.3e}", rep.sup_violation);
        if let Some(p) = prev {
            assert!(rep.sup_violation <= p);
        }
        prev = Some(rep.sup_violation);
        if r == 4 {
            assert!(rep.pass, "{}", rep.sup_violation);
            let sup = fc.sup_height(2000, 3);
            assert!(sup < FRAC_PI_2 - 0.1, "{sup}");
        }
    }

    // truncation error: consecutive balls agree on the fundamental polygon
    let (u3, u4) = (orbit_envelope(&g, &seeds, 4).unwrap(), orbit_envelope(&g, &seeds, 5).unwrap());
    let region = SampleRegion::Polygon(octagon_vertices());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gap = (0..500)
        .map(|_| {
            let x = region.sample(&mut rng);
            (u3.height(&x) - u4.height(&x)).abs()
        })
        .fold(0.0, f64::max);
    println!("orbit envelope truncation gap (radius 4 vs 5): {gap:.3e}");
    assert!(gap < 1e-12, "{gap}");

    let bump = CConvexFunction::from_height_fn(|x| 0.3 + 0.2 * (-x.radius()).exp(), 0.5, "bump").unwrap();
    let rep = invariance_check(&FuchsianCConvex::new(bump, g, 1e-6), 100, 3);
    assert!(!rep.pass && rep.sup_violation > 0.01);
}

fn quotient_setup() -> &'static (FuchsianCConvex, InducedDistanceField) {
    static S: OnceLock<(FuchsianCConvex, InducedDistanceField)> = OnceLock::new();
    S.get_or_init(|| {
        let mesh = Arc::new(GeodesicMesh::build(MeshRegion::Disc(3.0), MeshParams::new(0.15, 10)).unwrap());
        let u = CConvexFunction::zero();
        let field = InducedDistanceField::new(&u, mesh).unwrap();
        (FuchsianCConvex::new(u, group().clone(), 1e-12), field)
    })
}

#[test]
fn quotient_distance_for_zero_function() {
    let (fc, field) = quotient_setup();
    let x = H2Point::from_polar(0.3, 0.5);
    assert_eq!(quotient_distance(fc, field, 1.0, &x, &x, 3).unwrap(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ball = group().ball(3).unwrap();
    for _ in 0..6 {
        let x = H2Point::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..6.3));
        let y = H2Point::from_polar(rng.gen_range(1.0..2.2), rng.gen_range(0.0..6.3));
        let q = quotient_distance(fc, field, 1.0, &x, &y, 3).unwrap();
        let exact = ball.iter().map(|m| h2_distance(&x, &m.act(&y))).fold(f64::INFINITY, f64::min);
        assert!(q >= exact - 1e-12 && q <= exact * (1.0 + 5e-3), "{q} vs {exact}");
        let s = symmetric_quotient_distance(fc, field, 1.0, &x, &y, 3).unwrap();
        let s2 = symmetric_quotient_distance(fc, field, 1.0, &y, &x, 3).unwrap();
        assert_eq!(s, s2);
        let mut last = f64::INFINITY;
        for r in 0..=3 {
            let e = quotient_estimate(group(), field, 1.0, &x, &y, r).unwrap();
            assert!(e.value <= last);
            last = e.value;
        }
    }
}

#[test]
fn quotient_distance_reports_small_balls() {
    let (fc, field) = quotient_setup();
    // y near a side: its nearest translate is across the side
    let x = H2Point::from_polar(1.4, FRAC_PI_4 / 2.0);
    let y = H2Point::from_polar(1.4, FRAC_PI_4 / 2.0 + PI);
    assert_eq!(quotient_distance(fc, field, 1.0, &x, &y, 0), Err(Error::BallInsufficient { radius: 0 }));
    assert!(quotient_distance(fc, field, 1.0, &x, &y, 2).is_ok());
    let far = H2Point::from_polar(6.0, 0.0);
    assert_eq!(quotient_distance(fc, field, 1.0, &far, &y, 2), Err(Error::OutsideCoverage));
}

#[test]
fn reduction_and_quotient_distance() {
    let g = group();
    let octagon = octagon_vertices();
    let klein: Vec<[f64; 2]> = octagon.iter().map(H2Point::klein).collect();
    let ball = g.ball(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..40 {
        let x = H2Point::from_polar(4.0 * rng.gen::<f64>(), 6.3 * rng.gen::<f64>());
        let y = H2Point::from_polar(4.0 * rng.gen::<f64>(), 6.3 * rng.gen::<f64>());
        let (xr, s) = g.reduce(&x).unwrap();
        assert!(adscurv::surface::klein_polygon_contains(&klein, xr.klein()) || xr.radius() <= octagon_circumradius() + 1e-9);
        assert!(h2_distance(&s.act(&x), &xr) < 1e-9);
        let d = g.quotient_h2_distance(&x, &y).unwrap();
        // brute force over a large word ball from the reduced points
        let (yr, _) = g.reduce(&y).unwrap();
        let brute = ball.iter().map(|m| h2_distance(&xr, &m.act(&yr))).fold(f64::INFINITY, f64::min);
        assert!((d - brute).abs() < 1e-9, "{d} {brute}");
        assert!(d <= h2_distance(&x, &y) + 1e-12);
        // invariant under moving either point by the group
        let moved = g.quotient_h2_distance(&ball[17].act(&x), &ball[301].act(&y)).unwrap();
        assert!((moved - d).abs() < 1e-9);
    }
    let plain = FuchsianGroup::new(g.generators().to_vec(), 2, None).unwrap();
    assert!(matches!(plain.quotient_h2_distance(&H2Point::origin(), &H2Point::origin()), Err(Error::UnsupportedSource(_))));
}
