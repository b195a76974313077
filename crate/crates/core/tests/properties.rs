use boxing_core::cascade::FaceBox;
use boxing_core::content::{
    cover_ball_dyadic, hc_dyadic, hc_dyadic_bruteforce, hc_sandwich, hc_small_m, restricted_content,
    BallCollection, ContentParams, Region,
};
use boxing_core::dyadic::{DyadicCube, DyadicScalar, LinfBall, VoxelSet};
use proptest::prelude::*;

fn cells(n: usize, side: i64, max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(0..side, n), 1..=max)
}

fn voxels(n: usize, side: i64, max: usize) -> impl Strategy<Value = VoxelSet> {
    cells(n, side, max).prop_map(move |c| VoxelSet::new(n, 0, c).unwrap())
}

fn exponent() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.25, 0.5, 1.0, 1.5, 2.0])
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scalar_round_trip(num in -1_000_000i64..1_000_000, level in -20i32..20) {
        let d = DyadicScalar::new(num, level);
        prop_assert_eq!(DyadicScalar::from_f64(d.to_f64()), Some(d));
    }

    #[test]
    fn scalar_order_matches_floats(a in -5000i64..5000, la in -8i32..8, b in -5000i64..5000, lb in -8i32..8) {
        let (x, y) = (DyadicScalar::new(a, la), DyadicScalar::new(b, lb));
        prop_assert_eq!(x.cmp(&y), x.to_f64().partial_cmp(&y.to_f64()).unwrap());
    }

    #[test]
    fn children_tile_the_parent(level in -4i32..4, anchor in prop::collection::vec(-50i64..50, 1..=3)) {
        let q = DyadicCube::new(level, anchor.clone());
        let kids = q.children();
        prop_assert_eq!(kids.len(), 1 << anchor.len());
        for (i, a) in kids.iter().enumerate() {
            prop_assert!(q.contains(a));
            prop_assert_eq!(&a.parent(), &q);
            for b in &kids[i + 1..] {
                prop_assert!(a.interiors_disjoint(b));
            }
        }
        prop_assert!(q.ancestor(level + 3).contains(&q));
    }

    #[test]
    fn tree_matches_enumeration(x in voxels(2, 8, 5), m in exponent()) {
        let p = ContentParams::new(m, 2).unwrap();
        let dp = hc_dyadic(&x, &p).value;
        let bf = hc_dyadic_bruteforce(&x, &p, 4).unwrap();
        prop_assert!(close(dp, bf), "tree {} vs enumeration {}", dp, bf);
    }

    #[test]
    fn witness_is_a_cover_of_that_cost(x in voxels(3, 8, 12), m in exponent()) {
        let p = ContentParams::new(m, 3).unwrap();
        let r = hc_dyadic(&x, &p);
        for c in x.cubes() {
            prop_assert!(r.witness_cover.iter().any(|w| w.contains(&c)));
        }
        let cost: f64 = r.witness_cover.iter().map(|w| w.cost(m)).sum();
        prop_assert!(close(cost, r.value));
    }

    #[test]
    fn content_is_monotone_and_subadditive(a in voxels(2, 32, 10), b in voxels(2, 32, 10), m in exponent()) {
        let p = ContentParams::new(m, 2).unwrap();
        let ab = a.union(&b).unwrap();
        let (ha, hb, hab) = (hc_dyadic(&a, &p).value, hc_dyadic(&b, &p).value, hc_dyadic(&ab, &p).value);
        prop_assert!(hab >= ha.max(hb) * (1.0 - 1e-12));
        prop_assert!(hab <= (ha + hb) * (1.0 + 1e-12));
    }

    #[test]
    fn refining_the_grid_changes_nothing(x in voxels(2, 16, 8), m in exponent(), k in 1i32..3) {
        let p = ContentParams::new(m, 2).unwrap();
        prop_assert!(close(hc_dyadic(&x, &p).value, hc_dyadic(&x.refined(-k), &p).value));
    }

    #[test]
    fn small_exponent_content_sits_in_the_sandwich(x in voxels(2, 16, 8), m in prop::sample::select(vec![0.25, 0.5, 0.75, 1.0])) {
        let p = ContentParams::new(m, 2).unwrap();
        let (lo, hi) = hc_sandwich(&x, &p);
        let exact = hc_small_m(&x, m).unwrap();
        prop_assert!(lo <= exact * (1.0 + 1e-12) && exact <= hi * (1.0 + 1e-12), "{} <= {} <= {}", lo, exact, hi);
    }

    #[test]
    fn ball_cover_holds_the_ball(
        center in prop::collection::vec(-200i64..200, 1..=3),
        radius in 1i64..200,
        probe in prop::collection::vec(0.0f64..=1.0, 3),
    ) {
        let ball = LinfBall::new(
            center.iter().map(|&c| DyadicScalar::new(c, -3)).collect(),
            DyadicScalar::new(radius, -3),
        );
        let n = ball.n();
        let cover = cover_ball_dyadic(&ball).unwrap();
        prop_assert!(cover.len() <= 4usize.pow(n as u32));
        let p: Vec<f64> = (0..n)
            .map(|i| ball.lo(i).to_f64() + probe[i] * ball.diameter().to_f64())
            .collect();
        let inside = cover.iter().any(|q| {
            let (lo, hi) = q.bounds::<f64>();
            (0..n).all(|i| lo[i] <= p[i] && p[i] <= hi[i])
        });
        prop_assert!(inside);
    }

    #[test]
    fn restricted_content_is_monotone(
        balls in prop::collection::vec((prop::collection::vec(-8i64..8, 2), 1i64..6), 1..=6),
        picks in prop::collection::vec((0usize..6, -1.0f64..1.0, -1.0f64..1.0), 1..=12),
        m in exponent(),
    ) {
        let balls: Vec<LinfBall> = balls
            .iter()
            .map(|(c, r)| LinfBall::new(c.iter().map(|&v| DyadicScalar::from_int(v)).collect(), DyadicScalar::from_int(*r)))
            .collect();
        let points: Vec<Vec<f64>> = picks
            .iter()
            .map(|(j, u, v)| {
                let b = &balls[j % balls.len()];
                let (c, r) = (b.center_real::<f64>(), b.radius_real::<f64>());
                vec![c[0] + u * r, c[1] + v * r]
            })
            .collect();
        let coll = BallCollection::pruned(balls).unwrap();
        let p = ContentParams::new(m, 2).unwrap();
        let half = Region::from_points(2, points[..points.len().div_ceil(2)].to_vec());
        let all = Region::from_points(2, points);
        let (vh, va) = (
            restricted_content(&half, &coll, &p).unwrap().value,
            restricted_content(&all, &coll, &p).unwrap().value,
        );
        let total: f64 = coll.weights(m).into_iter().sum();
        prop_assert!(vh <= va * (1.0 + 1e-12));
        prop_assert!(va <= total * (1.0 + 1e-12));
    }

    #[test]
    fn radial_projection_lands_on_the_boundary(
        o in prop::collection::vec(0.2f64..0.8, 3),
        p in prop::collection::vec(0.0f64..=1.0, 3),
    ) {
        let face = FaceBox { lo: vec![0.0; 3], hi: vec![1.0; 3], free: 0b111 };
        prop_assume!(o.iter().zip(&p).any(|(a, b)| (a - b).abs() > 1e-6));
        let q = face.radial_project(&o, &p).unwrap();
        prop_assert!(face.contains(&q, 1e-12));
        prop_assert!(!face.in_relint(&q, 1e-12));
        // q − o = t·(p − o) with t ≥ 1
        let k = (0..3).max_by(|&i, &j| (p[i] - o[i]).abs().total_cmp(&(p[j] - o[j]).abs())).unwrap();
        let t = (q[k] - o[k]) / (p[k] - o[k]);
        prop_assert!(t >= 1.0 - 1e-9);
        for i in 0..3 {
            prop_assert!((q[i] - o[i] - t * (p[i] - o[i])).abs() <= 1e-9);
        }
    }
}
