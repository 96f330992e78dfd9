//! Invariants checked against independent oracles written here.

use std::sync::Arc;

use proptest::prelude::*;
use richowner::construction::build_random_graph;
use richowner::crt::{draw_hash_tag, HashScheme};
use richowner::graph::{GraphParams, LabeledBipartiteGraph};
use richowner::oracle::toy::{run_program, toy_complexity};
use richowner::oracle::{ComplexityOracle, ComplexityProfile, CorrelationSet, CountingOracle, Sender, ToyMachineConfig, ToyOracle};
use richowner::protocol::{decode_membership, encode, encode_triple, RateVector};
use richowner::rational::{rat, Rational};
use richowner::scenarios::collinear::is_collinear_raw;
use richowner::scenarios::dms::{entropy_profile, SourceDistribution};
use richowner::scenarios::gf::Field;
use richowner::scenarios::region::{validate_rate_region, validate_rate_region_with_margin};
use richowner::BitString;

/// Reference interpreter: parse the whole program first, then run it over a bit vector.
mod reference {
    #[derive(Debug)]
    pub enum Ins {
        Literal(Vec<bool>),
        Repeat,
        Side(usize),
        Halt,
    }

    pub fn parse(bits: &[bool]) -> Option<Vec<Ins>> {
        let mut out = Vec::new();
        let mut i = 0;
        let take = |i: &mut usize, k: usize| -> Option<Vec<bool>> {
            let s = bits.get(*i..*i + k)?.to_vec();
            *i += k;
            Some(s)
        };
        let num = |b: &[bool]| b.iter().fold(0usize, |acc, &x| acc * 2 + x as usize);
        while i < bits.len() {
            let op = take(&mut i, 2)?;
            match (op[0], op[1]) {
                (false, false) => {
                    let len = num(&take(&mut i, 4)?);
                    out.push(Ins::Literal(take(&mut i, len)?));
                }
                (false, true) => out.push(Ins::Repeat),
                (true, false) => out.push(Ins::Side(num(&take(&mut i, 2)?))),
                (true, true) => {
                    out.push(Ins::Halt);
                    break;
                }
            }
        }
        Some(out)
    }

    pub fn run(bits: &[bool], preload: &[bool], sides: &[Vec<bool>], width: usize, budget: u64) -> Option<Vec<bool>> {
        let program = parse(bits)?;
        let full = preload.len() + width;
        let mut buf = preload.to_vec();
        let mut steps = 0u64;
        for ins in program {
            steps += 1;
            match ins {
                Ins::Literal(data) => {
                    steps += data.len() as u64;
                    buf.extend(data);
                }
                Ins::Repeat => {
                    if buf.is_empty() {
                        return None;
                    }
                    let period = buf.len();
                    while buf.len() < full {
                        buf.push(buf[buf.len() - period]);
                        steps += 1;
                    }
                }
                Ins::Side(i) => {
                    let side = sides.get(i)?;
                    steps += side.len() as u64;
                    buf.extend(side);
                }
                Ins::Halt => {}
            }
            if buf.len() > full {
                return None;
            }
        }
        (buf.len() == full && steps <= budget).then(|| buf[preload.len()..].to_vec())
    }
}

fn to_bits(s: &BitString) -> Vec<bool> {
    (0..s.width()).map(|i| s.value() >> (s.width() - 1 - i) & 1 == 1).collect()
}

fn bs(width: u32, value: u64) -> BitString {
    BitString::new(width, value & ((1u64 << width) - 1)).unwrap()
}

fn profile_strategy() -> impl Strategy<Value = ComplexityProfile> {
    prop::array::uniform7(0u32..24).prop_map(ComplexityProfile::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4096))]

    #[test]
    fn toy_machine_matches_reference(
        (plen, program) in (0u32..=24).prop_flat_map(|w| (Just(w), 0u64..(1u64 << w))),
        (pw, preload) in (0u32..=6).prop_flat_map(|w| (Just(w), 0u64..(1u64 << w))),
        sides in prop::collection::vec((1u32..=5, any::<u64>()), 0..3),
        width in 0u32..=12,
        budget in 0u64..60,
    ) {
        let program = bs(plen, program);
        let preload = bs(pw, preload);
        let sides: Vec<BitString> = sides.into_iter().map(|(w, v)| bs(w, v)).collect();
        let side_bits: Vec<Vec<bool>> = sides.iter().map(to_bits).collect();
        let got = run_program(&program, &preload, &sides, width, budget).map(|o| to_bits(&o));
        let want = reference::run(&to_bits(&program), &to_bits(&preload), &side_bits, width as usize, budget);
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_axioms(q in 2u32..=8, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let f = Field::new(q).unwrap();
        let (a, b, c) = (a % f.order(), b % f.order(), c % f.order());
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(a, 1), a);
        if a != 0 {
            let inv = f.inv(a).unwrap();
            prop_assert_eq!(f.mul(a, inv), 1);
        } else {
            prop_assert!(f.inv(0).is_none());
        }
    }

    #[test]
    fn collinearity_is_affine_invariant(
        q in 2u32..=5,
        pts in prop::array::uniform3(any::<u64>()),
        shift in any::<u64>(),
        scale in any::<u64>(),
    ) {
        let f = Field::new(q).unwrap();
        let order = f.order();
        let pts = pts.map(|p| p % (order * order));
        let split = |p: u64| (p >> q, p & (order - 1));
        let join = |(x, y): (u64, u64)| x << q | y;
        let (sx, sy) = split(shift % (order * order));
        let lambda = 1 + scale % (order - 1);
        let moved = pts.map(|p| {
            let (x, y) = split(p);
            join((f.add(f.mul(lambda, x), sx), f.add(f.mul(lambda, y), sy)))
        });
        let swapped = pts.map(|p| {
            let (x, y) = split(p);
            join((y, x))
        });
        let base = is_collinear_raw(&f, pts[0], pts[1], pts[2]);
        prop_assert_eq!(base, is_collinear_raw(&f, moved[0], moved[1], moved[2]));
        prop_assert_eq!(base, is_collinear_raw(&f, swapped[0], swapped[1], swapped[2]));
        prop_assert_eq!(base, is_collinear_raw(&f, pts[2], pts[0], pts[1]));
    }

    #[test]
    fn region_is_upward_closed(profile in profile_strategy(), rates in prop::array::uniform3(0u32..24), bump in 0usize..3) {
        let r = RateVector::new(rates[0], rates[1], rates[2]);
        let mut up = rates;
        up[bump] += 1;
        let u = RateVector::new(up[0], up[1], up[2]);
        if validate_rate_region(&r, &profile).passed {
            prop_assert!(validate_rate_region(&u, &profile).passed);
        }
        for margin in -3i64..3 {
            if validate_rate_region_with_margin(&r, &profile, margin + 1).passed {
                prop_assert!(validate_rate_region_with_margin(&r, &profile, margin).passed);
            }
        }
    }

    #[test]
    fn region_matches_direct_inequalities(profile in profile_strategy(), rates in prop::array::uniform3(0u32..24)) {
        let r = RateVector::new(rates[0], rates[1], rates[2]);
        let v = profile.values();
        // Order: A, B, C, AB, AC, BC, ABC; the bound for V is C(all) - C(complement of V).
        let abc = v[6] as i64;
        let comp = [v[5], v[4], v[3], v[2], v[1], v[0], 0].map(|x| x as i64);
        let sums = [
            rates[0], rates[1], rates[2], rates[0] + rates[1], rates[0] + rates[2], rates[1] + rates[2],
            rates[0] + rates[1] + rates[2],
        ];
        let direct = (0..7).all(|i| sums[i] as i64 >= abc - comp[i]);
        prop_assert_eq!(validate_rate_region(&r, &profile).passed, direct);
    }

    #[test]
    fn entropy_never_exceeds_counting(weights in prop::array::uniform8(0u32..4), n in 1u32..=3) {
        prop_assume!(weights.iter().any(|&w| w > 0));
        let total: u32 = weights.iter().sum();
        let probs = weights.map(|w| Rational::new(w as i128, total as i128));
        let dist = SourceDistribution::new(probs).unwrap();
        let counting = dist.support_set(n).unwrap().profile().values();
        let entropy = entropy_profile(&dist, n);
        for i in 0..7 {
            prop_assert!(entropy[i] <= counting[i] as f64 + 1e-9, "entry {i}: {} > {}", entropy[i], counting[i]);
        }
    }

    #[test]
    fn hash_tags_accept_their_source(n in 2u32..=24, v in any::<u64>(), seed in any::<u64>(), s in 1u64..5) {
        let scheme = HashScheme::new(n, s, rat(1, 8)).unwrap();
        let u = bs(n, v);
        prop_assert!(draw_hash_tag(&u, &scheme, seed).unwrap().verifies(&u));
    }

    #[test]
    fn encoding_replays_and_lands_on_a_neighbor(n in 2u32..=10, k in 1u32..=10, x in any::<u64>(), seed in any::<u64>()) {
        let k = k.min(n);
        let g = build_random_graph(n, k, rat(1, 2), 1, seed ^ 0x55).unwrap();
        let x = bs(n, x);
        let first = encode(Sender::B, &g, &x, None, seed).unwrap();
        let second = encode(Sender::B, &g, &x, None, seed).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(first.payload.width(), g.params().m);
        prop_assert!(g.is_neighbor(x.value(), first.payload.value()));
        prop_assert!(first.tag.is_none());
    }

    #[test]
    fn membership_survivors_match_recount(
        members in prop::collection::vec(prop::array::uniform3(0u64..8), 1..40),
        pick in any::<prop::sample::Index>(),
        ms in prop::array::uniform3(1u32..=3),
        seed in any::<u64>(),
    ) {
        let set = CorrelationSet::explicit(3, members.clone()).unwrap();
        let graphs = [0usize, 1, 2].map(|i| {
            LabeledBipartiteGraph::seeded(GraphParams::plain(3, ms[i], 1), seed.wrapping_add(i as u64)).unwrap()
        });
        let truth = members[pick.index(members.len())];
        let triple = truth.map(|v| bs(3, v));
        let codewords = encode_triple(&graphs, &triple, None, seed).unwrap();
        let out = decode_membership(&codewords, &set, &graphs).unwrap();
        let mut recount = 0u64;
        set.for_each(|t| {
            let adjacent = (0..3).all(|i| {
                (0..graphs[i].degree()).any(|y| graphs[i].neighbor_raw(t[i], y) == codewords[i].payload.value())
            });
            recount += adjacent as u64;
        });
        prop_assert_eq!(out.survivors, recount);
        prop_assert!(out.survivors >= 1);
        if out.survivors == 1 {
            prop_assert_eq!(out.triple, Some(truth));
        } else {
            prop_assert_eq!(out.triple, None);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn toy_complexity_is_antitone_in_budgets(x in any::<u64>(), w in 1u32..=6, l in 4u32..=9, t in 5u64..40, dl in 0u32..=2, dt in 0u64..30) {
        let x = bs(w, x);
        let small = ToyMachineConfig::new(l, t).unwrap();
        let large = ToyMachineConfig::new(l + dl, t + dt).unwrap();
        prop_assert!(toy_complexity(&x, &large, None) <= toy_complexity(&x, &small, None));
    }

    #[test]
    fn b_sets_respect_their_bound(bound in 0u32..=8, target in 0usize..3) {
        let target = Sender::from_index(target).unwrap();
        let toy = ToyOracle::new(ToyMachineConfig::new(10, 120).unwrap(), 6, 2).unwrap();
        let b = toy.enumerate_b_set(target, &[], bound).unwrap();
        prop_assert!(b.members.len() as u64 <= 1u64 << (bound + 1));
        prop_assert!(b.members.windows(2).all(|w| w[0] < w[1]));
        for m in &b.members {
            let c = toy.complexity_given(m, &BitString::empty());
            prop_assert!(matches!(c, richowner::oracle::toy::ToyComplexity::Exact(v) if v <= bound));
        }
        let set = Arc::new(CorrelationSet::collinear(2).unwrap());
        let counting = CountingOracle::new(set, 0);
        prop_assert!(counting.enumerate_b_set(target, &[], bound).unwrap().members.len() as u64 <= 1u64 << (bound + 1));
    }
}

#[test]
fn reference_and_machine_agree_on_a_repeating_program() {
    // literal "101", then repeat to width 9
    let program = BitString::from_bin("00001110101").unwrap();
    let want: Vec<bool> = "101101101".chars().map(|c| c == '1').collect();
    let got = run_program(&program, &BitString::empty(), &[], 9, 100).map(|o| to_bits(&o));
    assert_eq!(got, Some(want.clone()));
    assert_eq!(reference::run(&to_bits(&program), &[], &[], 9, 100), Some(want));
    assert_eq!(run_program(&program, &BitString::empty(), &[], 9, 9), None);
}

#[test]
fn halt_costs_one_step() {
    // repeat then halt over a one-bit preload: 1 + 9 + 1 steps
    let program = BitString::from_bin("0111").unwrap();
    let preload = BitString::from_bin("0").unwrap();
    assert_eq!(run_program(&program, &preload, &[], 9, 10), None);
    assert_eq!(reference::run(&to_bits(&program), &[false], &[], 9, 10), None);
    let zeros = run_program(&program, &preload, &[], 9, 11).unwrap();
    assert_eq!(zeros, BitString::zeros(9));
}
