use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordocr::network::{
    blstm_forward, init_params, lstm_cell_step_full, network_backward, FrameSequence, LstmBlockParams, NetworkDims,
};

fn frames(rng: &mut ChaCha8Rng, dim: usize, t: usize) -> FrameSequence<f64> {
    FrameSequence::new(dim, (0..dim * t).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap()
}

#[test]
fn zero_block_outputs_nothing() {
    let p = LstmBlockParams::<f64>::zeros(3, 4);
    let act = lstm_cell_step_full(&p, &[0.2, 0.9, 0.4], &[0.0; 4], &[0.0; 4], 0).unwrap();
    assert!(act.hidden.iter().chain(&act.cell).all(|&v| v == 0.0));
}

#[test]
fn closed_input_and_open_forget_gate_hold_the_cell() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (inputs, n) = (3, 4);
    let dims = NetworkDims::new(inputs, n, 2).unwrap();
    let mut p = init_params::<f64>(dims, 9).forward;
    for b in [20.0, 30.0] {
        // gate order: cell input, input, forget, output
        p.gate_bias_mut(1).fill(-b);
        p.gate_bias_mut(2).fill(b);
        for _ in 0..20 {
            let x: Vec<f64> = (0..inputs).map(|_| rng.random_range(0.0..1.0)).collect();
            let h: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let act = lstm_cell_step_full(&p, &x, &h, &c, 0).unwrap();
            for j in 0..n {
                assert!((act.cell[j] - c[j]).abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn forward_pass_is_a_distribution_and_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let dims = NetworkDims::new(8, 5, 4).unwrap();
    let params = init_params::<f64>(dims, 1);
    for t in [1, 2, 17] {
        let seq = frames(&mut rng, 8, t);
        let a = blstm_forward(&params, &seq).unwrap();
        assert_eq!(a.len(), t);
        for step in 0..t {
            assert!((a.probs_at(step).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(a, blstm_forward(&params, &seq).unwrap());
    }
    assert_eq!(init_params::<f64>(dims, 1), params);
    assert_ne!(init_params::<f64>(dims, 2), params);
}

#[test]
fn zero_upstream_gradient_gives_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dims = NetworkDims::new(4, 3, 3).unwrap();
    let params = init_params::<f64>(dims, 3);
    let state = blstm_forward(&params, &frames(&mut rng, 4, 6)).unwrap();
    let grad = network_backward(&params, &state, &[0.0; 18]).unwrap();
    assert!(grad.flat().iter().all(|&g| g == 0.0));
}

#[test]
fn backward_pass_is_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dims = NetworkDims::new(4, 3, 3).unwrap();
    let params = init_params::<f64>(dims, 4);
    let state = blstm_forward(&params, &frames(&mut rng, 4, 5)).unwrap();
    let upstream: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
    let a = network_backward(&params, &state, &upstream).unwrap().flat();
    let b = network_backward(&params, &state, &upstream).unwrap().flat();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}
