mod common;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use deonnet::logic::{parse_program, Atom};
use deonnet::neural::{cilp_translate, CilpParams, Network, NetworkSchema};
use deonnet::training::{
    cross_validate, enumerate_worlds, evaluate, generate_dataset, gradient, squared_error, train, Dataset, Example,
    TrainConfig,
};

fn random_example<R: Rng>(rng: &mut R, net: &Network) -> Example {
    let input = (0..net.n_inputs()).map(|_| *[-1.0, 0.0, 1.0].choose(rng).unwrap()).collect();
    let target = (0..net.n_outputs()).map(|_| *[-1.0, 0.0, 1.0].choose(rng).unwrap()).collect();
    Example::new(input, target)
}

fn rel_close(analytic: f64, numeric: f64) -> bool {
    let scale = analytic.abs().max(numeric.abs());
    scale < 1e-7 || (analytic - numeric).abs() / scale < 1e-4
}

/// Central difference of the error in one parameter.
fn numeric(net: &Network, ex: &Example, set: impl Fn(&mut Network, f64)) -> f64 {
    let eps = 1e-5;
    let (mut plus, mut minus) = (net.clone(), net.clone());
    set(&mut plus, eps);
    set(&mut minus, -eps);
    (squared_error(&plus, ex).unwrap() - squared_error(&minus, ex).unwrap()) / (2.0 * eps)
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..20 {
        let (ni, nh, no) = (rng.gen_range(1..5), rng.gen_range(1..5), rng.gen_range(1..4));
        let net = common::random_network(&mut rng, ni, nh, no);
        let ex = random_example(&mut rng, &net);
        let (_, g) = gradient(&net, &ex).unwrap();
        for h in 0..nh {
            for i in 0..ni {
                let n = numeric(&net, &ex, |m, d| m.w_ih[h][i] += d);
                assert!(rel_close(g.w_ih[h][i], n), "w_ih[{h}][{i}]: {} vs {n}", g.w_ih[h][i]);
            }
            let n = numeric(&net, &ex, |m, d| m.theta_h[h] += d);
            assert!(rel_close(g.theta_h[h], n), "theta_h[{h}]: {} vs {n}", g.theta_h[h]);
        }
        for o in 0..no {
            for h in 0..nh {
                let n = numeric(&net, &ex, |m, d| m.w_ho[o][h] += d);
                assert!(rel_close(g.w_ho[o][h], n), "w_ho[{o}][{h}]: {} vs {n}", g.w_ho[o][h]);
            }
            let n = numeric(&net, &ex, |m, d| m.theta_o[o] += d);
            assert!(rel_close(g.theta_o[o], n), "theta_o[{o}]: {} vs {n}", g.theta_o[o]);
        }
    }
}

/// Plain stochastic gradient descent with the same visiting order as
/// `train` uses.
fn plain_descent(net: &Network, data: &[Example], eta: f64, epochs: usize, seed: u64) -> Network {
    let mut net = net.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (_, g) = gradient(&net, &data[i]).unwrap();
            for (p, d) in net.w_ho.iter_mut().flatten().zip(g.w_ho.iter().flatten()) {
                *p += -eta * d;
            }
            for (p, d) in net.theta_o.iter_mut().zip(&g.theta_o) {
                *p += -eta * d;
            }
            for (p, d) in net.w_ih.iter_mut().flatten().zip(g.w_ih.iter().flatten()) {
                *p += -eta * d;
            }
            for (p, d) in net.theta_h.iter_mut().zip(&g.theta_h) {
                *p += -eta * d;
            }
        }
    }
    net
}

#[test]
fn zero_momentum_is_plain_gradient_descent_bit_for_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let net = common::random_network(&mut rng, 4, 3, 2);
    let data: Vec<Example> = (0..25).map(|_| random_example(&mut rng, &net)).collect();
    let cfg = TrainConfig {
        eta: 0.1,
        momentum: 0.0,
        epochs: 15,
        seed: 9,
        ..TrainConfig::default()
    };
    let trained = train(&net, &data, &cfg).unwrap().network;
    assert_eq!(trained, plain_descent(&net, &data, 0.1, 15, 9));
}

#[test]
fn momentum_changes_the_trajectory() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let net = common::random_network(&mut rng, 4, 3, 2);
    let data: Vec<Example> = (0..25).map(|_| random_example(&mut rng, &net)).collect();
    let cfg = |momentum| TrainConfig {
        momentum,
        epochs: 5,
        ..TrainConfig::default()
    };
    assert_ne!(train(&net, &data, &cfg(0.0)).unwrap().network, train(&net, &data, &cfg(0.5)).unwrap().network);
}

#[test]
fn part_is_never_below_tot() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..100 {
        let net = common::random_network(&mut rng, 3, 3, 3);
        let data: Vec<Example> = (0..rng.gen_range(1..20)).map(|_| random_example(&mut rng, &net)).collect();
        let m = evaluate(&net, &data).unwrap();
        assert!(m.part >= m.tot);
    }
}

#[test]
fn single_example_error_collapses() {
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    let net = common::random_network(&mut rng, 3, 2, 1);
    let ex = Example::new(vec![1.0, -1.0, 1.0], vec![0.5]);
    let before = squared_error(&net, &ex).unwrap();
    let cfg = TrainConfig {
        epochs: 500,
        ..TrainConfig::default()
    };
    let after = squared_error(&train(&net, std::slice::from_ref(&ex), &cfg).unwrap().network, &ex).unwrap();
    assert!(after < 0.01 * before, "{before} -> {after}");
}

fn cv_fixture() -> (Network, Vec<Example>) {
    let p = parse_program("a <- b, not c.\nd <- c.\nd <- e, b.").unwrap();
    let net = cilp_translate(&p, &CilpParams::default()).unwrap();
    let atoms: Vec<Atom> = ["b", "c", "e"].iter().map(|a| Atom::of(a)).collect();
    let data = generate_dataset(&p, &enumerate_worlds(&atoms).unwrap(), &NetworkSchema::of_program(&p)).unwrap();
    (net, data.dataset.examples)
}

#[test]
fn training_and_cross_validation_are_deterministic_across_thread_counts() {
    let (net, data) = cv_fixture();
    let cfg = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    assert_eq!(train(&net, &data, &cfg).unwrap().network, train(&net, &data, &cfg).unwrap().network);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| cross_validate(|s, f| net.randomized(s * 31 + f as u64, 0.5), &data, 2, &[1, 2, 3], &cfg).unwrap())
    };
    let (one, four) = (run(1), run(4));
    assert_eq!(one.folds.len(), 6);
    assert_eq!(one, four);
}

#[test]
fn datasets_round_trip_through_csv() {
    let (_, data) = cv_fixture();
    let (net, _) = cv_fixture();
    let d = Dataset {
        input_labels: net.input_labels.clone(),
        output_labels: net.output_labels.clone(),
        examples: data,
    };
    let text = d.to_csv().unwrap();
    assert!(text.starts_with("in:"));
    assert_eq!(Dataset::from_csv(&text).unwrap(), d);
    assert_eq!(Dataset::from_csv("in:a,out:b\n1,2\n").unwrap_err().name(), "MalformedDataset");
}
