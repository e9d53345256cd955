use hawkit::games::*;
use hawkit::geometry::{point_in_slab, Ball, Hyperplane, Point, Slab};
use hawkit::numerics::{int, rat, Rational};
use proptest::prelude::*;

fn origin_ball(r: Rational) -> Ball {
    Ball::new(Point::origin(3), r).unwrap()
}

fn x0_slab(width: Rational) -> Slab {
    Slab::new(Hyperplane::coordinate(3, 0), width).unwrap()
}

#[test]
fn schmidt_concentric_play() {
    let params = GameParams::schmidt(rat(1, 2), rat(1, 2), 3, 6);
    let t = referee_schmidt(&mut CenterAlice, &mut CenterBob::new(origin_ball(int(1))), &params, None).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    assert_eq!(t.final_ball.as_ref().unwrap().radius(), &rat(1, 4096));
    assert_eq!(t.verdict, Verdict::Undetermined);
    assert!(verify_transcript(&t).is_empty());
}

struct WrongRadiusAlice;

impl Alice for WrongRadiusAlice {
    fn respond(&mut self, _: usize, ball: &Ball, _: &GameParams) -> AliceMove {
        AliceMove::Schmidt { ball: Ball::new(ball.center().clone(), ball.radius() * rat(2, 3)).unwrap() }
    }
}

#[test]
fn schmidt_wrong_radius_forfeits() {
    let params = GameParams::schmidt(rat(1, 2), rat(1, 2), 3, 4);
    let t = play(&mut WrongRadiusAlice, &mut CenterBob::new(origin_ball(int(1))), &params, None).unwrap();
    assert!(matches!(t.termination, Termination::AliceForfeit { round: 0, .. }));
    assert_eq!(t.moves.len(), 1);
    assert!(verify_transcript(&t).is_empty());
}

#[test]
fn schmidt_random_players_verify() {
    let params = GameParams::schmidt(rat(1, 3), rat(2, 5), 3, 10);
    for seed in 0..20 {
        let t = play(
            &mut RandomSchmidtAlice::new(seed),
            &mut RandomBob::new(origin_ball(int(1)), seed + 100),
            &params,
            None,
        )
        .unwrap();
        assert_eq!(t.termination, Termination::Completed);
        assert!(verify_transcript(&t).is_empty());
    }
}

#[test]
fn absolute_shift_is_legal_indefinitely() {
    let params = GameParams::absolute(rat(1, 4), 3, 30);
    let t = referee_absolute(&mut SlabThroughCenterAlice, &mut ShiftBob::new(origin_ball(int(1))), &params, None)
        .unwrap();
    assert_eq!(t.termination, Termination::Completed);
    assert!(verify_transcript(&t).is_empty());
}

#[test]
fn absolute_escape_exists_below_one_third() {
    // Slabs with awkward normals: the far-side construction stays exact and legal.
    for beta in [rat(1, 4), rat(3, 10), rat(33, 100)] {
        let params = GameParams::absolute(beta.clone(), 3, 1);
        let b = origin_ball(int(1));
        for normal in [[1, 1, 0], [1, 2, 3], [2, -1, 5]] {
            let plane = Hyperplane::new(normal.iter().map(|&v| int(v)).collect(), rat(1, 7)).unwrap();
            let slab = Slab::new(plane, &beta * b.radius()).unwrap();
            let mv = AliceMove::Absolute { slab: slab.clone() };
            let next = absolute_escape(&b, &slab, &params).expect("escape exists for beta < 1/3");
            assert_eq!(check_bob_move(&params, &b, &mv, &next), Ok(()));
        }
    }
}

struct SmallBob(Ball);

impl Bob for SmallBob {
    fn open(&mut self, _: &GameParams) -> BobAction {
        BobAction::Move(self.0.clone())
    }

    fn respond(&mut self, _: usize, ball: &Ball, _: &AliceMove, params: &GameParams) -> BobAction {
        let far = Point(vec![ball.radius() * rat(3, 4), int(0), int(0)]);
        BobAction::Move(Ball::new(far, &params.beta * ball.radius() * rat(1, 2)).unwrap())
    }
}

#[test]
fn absolute_small_radius_forfeits() {
    let params = GameParams::absolute(rat(1, 4), 3, 3);
    let t = play(&mut SlabThroughCenterAlice, &mut SmallBob(origin_ball(int(1))), &params, None).unwrap();
    match &t.termination {
        Termination::BobForfeit { round, reason, .. } => {
            assert_eq!(*round, 1);
            assert!(reason.contains("below beta"), "{reason}");
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(t.verdict, Verdict::AliceCertified);
}

#[test]
fn absolute_width_boundary_is_legal() {
    let params = GameParams::absolute(rat(1, 4), 3, 1);
    let b = origin_ball(int(1));
    assert_eq!(check_alice_move(&params, &b, &AliceMove::Absolute { slab: x0_slab(rat(1, 4)) }), Ok(()));
    assert!(check_alice_move(&params, &b, &AliceMove::Absolute { slab: x0_slab(rat(26, 100)) }).is_err());
}

#[test]
fn potential_empty_alice_is_legal() {
    let params = GameParams::potential(rat(1, 2), int(1), 3, 12, 6);
    let t = referee_potential(&mut EmptyAlice, &mut RandomBob::new(origin_ball(int(1)), 7), &params, None).unwrap();
    assert_eq!(t.termination, Termination::Completed);
    assert!(verify_transcript(&t).is_empty());
}

#[test]
fn potential_geometric_budget() {
    let params = GameParams::potential(rat(1, 2), int(1), 3, 1, 6);
    let b = origin_ball(rat(3, 4));
    let slabs: Vec<Slab> = (1..=6).map(|k| x0_slab(int(2) * hawkit::numerics::pow_i(&rat(1, 8), k))).collect();
    let total: Rational = slabs.iter().map(|s| s.width().clone()).sum();
    assert_eq!(total, int(2) * (int(1) - hawkit::numerics::pow_i(&rat(1, 8), 6)) / int(7));
    assert!(total < rat(3, 8));
    assert_eq!(check_alice_move(&params, &b, &AliceMove::Potential { slabs: slabs.clone() }), Ok(()));
    // Fractional exponent: √(1/2)+√(1/8) ≈ 1.06 > √(3/8) ≈ 0.61.
    let mut frac = params.clone();
    frac.gamma = Some(rat(1, 2));
    let two = vec![x0_slab(rat(1, 2)), x0_slab(rat(1, 8))];
    assert!(check_alice_move(&frac, &b, &AliceMove::Potential { slabs: two }).is_err());
    let small = vec![x0_slab(rat(1, 16)), x0_slab(rat(1, 16))];
    assert_eq!(check_alice_move(&frac, &b, &AliceMove::Potential { slabs: small }), Ok(()));
}

struct FixedSlabAlice;

impl Alice for FixedSlabAlice {
    fn respond(&mut self, _: usize, ball: &Ball, params: &GameParams) -> AliceMove {
        AliceMove::Potential { slabs: vec![x0_slab(&params.beta * ball.radius())] }
    }
}

#[test]
fn final_center_in_declared_slab_certifies() {
    let params = GameParams::potential(rat(1, 2), int(1), 3, 5, 2);
    let t = play(&mut FixedSlabAlice, &mut CenterBob::new(origin_ball(int(1))), &params, None).unwrap();
    assert_eq!(t.verdict, Verdict::AliceCertified);
    assert_eq!(t.verdict_evidence["basis"], "slab");
    assert!(point_in_slab(t.final_ball.as_ref().unwrap().center(), &x0_slab(rat(1, 2))).unwrap());
}

#[test]
fn inflated_radius_is_reported_once() {
    let params = GameParams::potential(rat(1, 2), int(1), 3, 4, 6);
    let mut t = play(&mut EmptyAlice, &mut RandomBob::new(origin_ball(int(1)), 3), &params, None).unwrap();
    let last = t.moves.len() - 1;
    let Entry::Bob(b) = &t.moves[last].entry else { panic!("last move is bob's") };
    let inflated = Ball::new(b.center().clone(), b.radius() * int(3)).unwrap();
    t.moves[last].entry = Entry::Bob(inflated.clone());
    t.final_ball = Some(inflated);
    let v = verify_transcript(&t);
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].round, 4);
    assert_eq!(v[0].mover, Some(Mover::Bob));
}

#[test]
fn hand_written_transcript_verifies() {
    let params = GameParams::schmidt(rat(1, 2), rat(1, 2), 3, 3);
    let text = r#"{"params":{"kind":"schmidt","alpha":"1/2","beta":"1/2","gamma":null,"dimension":3,"max_rounds":3,"shrink_cap":"99/100","k_max":0}}
{"round":0,"mover":"bob","move":{"center":["0/1","0/1","0/1"],"radius":"1/1"}}
{"round":0,"mover":"alice","move":{"kind":"schmidt","ball":{"center":["1/2","0/1","0/1"],"radius":"1/2"}}}
{"round":1,"mover":"bob","move":{"center":["1/2","1/4","0/1"],"radius":"1/4"}}
{"round":1,"mover":"alice","move":{"kind":"schmidt","ball":{"center":["1/2","1/4","1/8"],"radius":"1/8"}}}
{"round":2,"mover":"bob","move":{"center":["9/16","1/4","1/8"],"radius":"1/16"}}
{"round":2,"mover":"alice","move":{"kind":"schmidt","ball":{"center":["9/16","1/4","1/8"],"radius":"1/32"}}}
{"round":3,"mover":"bob","move":{"center":["9/16","1/4","1/8"],"radius":"1/64"}}
{"final_ball":{"center":["9/16","1/4","1/8"],"radius":"1/64"},"verdict":"undetermined","termination":{"status":"completed"},"evidence":null}
"#;
    let t = GameTranscript::from_jsonl(text).unwrap();
    assert_eq!(t.params, params);
    assert!(verify_transcript(&t).is_empty());
    assert_eq!(t.to_jsonl(), text);
}

#[test]
fn replay_reproduces_moves() {
    let params = GameParams::potential(rat(1, 2), int(1), 3, 10, 6);
    let start = Ball::new(Point(vec![rat(1, 3), rat(-1, 5), rat(1, 7)]), rat(1, 2)).unwrap();
    let t = play(&mut EmptyAlice, &mut RandomBob::new(start.clone(), 11), &params, None).unwrap();
    let r = play(&mut EmptyAlice, &mut ReplayBob::from_transcript(&t), &params, None).unwrap();
    assert_eq!(t.to_jsonl(), r.to_jsonl());
    let again = play(&mut EmptyAlice, &mut RandomBob::new(start, 11), &params, None).unwrap();
    assert_eq!(t.to_jsonl(), again.to_jsonl());
    let parsed = GameTranscript::from_jsonl(&t.to_jsonl()).unwrap();
    assert_eq!(parsed.to_jsonl(), t.to_jsonl());
}

#[test]
fn greedy_converges_to_rational_point() {
    let params = GameParams::potential(rat(1, 2), int(1), 3, 12, 6);
    let start = Ball::new(Point(vec![rat(3, 10), rat(7, 20), rat(1, 3)]), rat(1, 2)).unwrap();
    let mut bob = GreedyBob::new(start, 16);
    let t = play(&mut EmptyAlice, &mut bob, &params, None).unwrap();
    assert!(verify_transcript(&t).is_empty());
    let c = t.final_ball.unwrap().center().clone();
    // The center settles exactly on some (p/q, r/q, z) with q ≤ 16.
    let on_grid = |q: i64| (&c.coords()[0] * int(q)).is_integer() && (&c.coords()[1] * int(q)).is_integer();
    assert!((1..=16).any(on_grid), "{c}");
    assert_eq!(c.coords()[2], rat(1, 3));
}

#[test]
fn parameter_validation() {
    assert!(GameParams::absolute(rat(1, 3), 3, 1).validate().is_err());
    assert!(GameParams::schmidt(int(1), rat(1, 2), 3, 1).validate().is_err());
    assert!(GameParams::potential(rat(1, 2), int(0), 3, 1, 1).validate().is_err());
    assert!(GameParams::potential(rat(1, 2), rat(1, 3), 3, 1, 1).validate().is_ok());
    let mut p = GameParams::potential(rat(1, 2), int(1), 3, 1, 1);
    p.shrink_cap = int(1);
    assert!(p.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn referee_transcripts_always_verify(seed in any::<u64>(), kind in 0u8..3, rounds in 1usize..7) {
        let start = origin_ball(int(1));
        let t = match kind {
            0 => play(
                &mut RandomSchmidtAlice::new(seed),
                &mut RandomBob::new(start, seed ^ 1),
                &GameParams::schmidt(rat(1, 2), rat(1, 3), 3, rounds),
                None,
            ),
            1 => play(
                &mut SlabThroughCenterAlice,
                &mut RandomBob::new(start, seed).with_grid(8),
                &GameParams::absolute(rat(1, 4), 3, rounds),
                None,
            ),
            _ => play(&mut EmptyAlice, &mut RandomBob::new(start, seed), &GameParams::potential(rat(1, 2), int(1), 3, rounds, 4), None),
        }
        .unwrap();
        prop_assert_eq!(&t.termination, &Termination::Completed);
        prop_assert!(verify_transcript(&t).is_empty());
        let balls: Vec<&Ball> = t.bob_balls().collect();
        for w in balls.windows(2) {
            prop_assert!(hawkit::geometry::ball_contains_ball(w[0], w[1]).unwrap());
        }
    }
}
