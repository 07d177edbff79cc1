//! Quick look at learning curves and runtime.
//! `cargo run --example probe -- <mode> <epochs> <seed> [key=value ...]`
//! keys: lr, gamma, crash_penalty, eps_end, eps_decay, sync, hidden, half_len

use fedring_fednet::{run_baseline_epochs, run_federated_epochs, Mode, TrainingConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode: Mode = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(Mode::Firl);
    let epochs: u32 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(50);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1);

    let mut cfg = TrainingConfig {
        epochs,
        ..TrainingConfig::default()
    };
    for arg in args.iter().skip(4) {
        let (k, v) = arg.split_once('=').expect("key=value");
        match k {
            "lr" => cfg.learner.learning_rate = v.parse().unwrap(),
            "gamma" => cfg.learner.gamma = v.parse().unwrap(),
            "crash_penalty" => cfg.traffic.crash_penalty = v.parse().unwrap(),
            "eps_end" => cfg.learner.epsilon.end = v.parse().unwrap(),
            "eps_decay" => cfg.learner.epsilon.decay_epochs = v.parse().unwrap(),
            "sync" => cfg.learner.target_sync_period = v.parse().unwrap(),
            "replay" => cfg.learner.replay_capacity = v.parse().unwrap(),
            "opt" => cfg.learner.optimistic_init = v.parse().unwrap(),
            "hidden" => {
                cfg.learner.hidden_sizes =
                    v.split(',').map(|h| h.parse().unwrap()).collect();
            }
            "half_len" => cfg.traffic.conflict_half_length = v.parse().unwrap(),
            "extra" => cfg.fed.max_extra_delay_epochs = v.parse().unwrap(),
            "merge" => cfg.fed.merge_count = v.parse().unwrap(),
            "eps_start" => cfg.learner.epsilon.start = v.parse().unwrap(),
            other => panic!("unknown key {other}"),
        }
    }

    let t0 = std::time::Instant::now();
    let out = if mode == Mode::Baseline {
        run_baseline_epochs(&cfg, seed).unwrap()
    } else {
        run_federated_epochs(mode, &cfg, seed).unwrap()
    };
    let dt = t0.elapsed();

    let window = (epochs as usize / 5).max(1);
    let tail: Vec<f64> = out
        .epochs
        .iter()
        .rev()
        .take(window)
        .map(|e| e.mean_speed)
        .collect();
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let crashes = out.epochs.iter().filter(|e| e.crashed).count();
    let tail_crashes = out
        .epochs
        .iter()
        .rev()
        .take(window)
        .filter(|e| e.crashed)
        .count();
    let total_steps: u64 = out.epochs.iter().map(|e| u64::from(e.steps)).sum();

    println!("mode={mode} seed={seed} epochs={epochs} wall={dt:.2?} rounds~{}", total_steps / 256);
    println!("final-window mean_speed = {tail_mean:.3} m/s, crashes {crashes}/{epochs} (tail {tail_crashes}/{window})");
    for chunk in out.epochs.chunks((epochs as usize / 20).max(1)) {
        let m = chunk.iter().map(|e| e.mean_speed).sum::<f64>() / chunk.len() as f64;
        let s = chunk.iter().map(|e| e.steps).sum::<u32>() / chunk.len() as u32;
        let c = chunk.iter().filter(|e| e.crashed).count();
        println!(
            "  epochs {:>4}-{:<4} mean_speed {m:>6.3}  steps {s:>5}  crashes {c}/{}",
            chunk[0].epoch_index,
            chunk.last().unwrap().epoch_index,
            chunk.len()
        );
    }
}
