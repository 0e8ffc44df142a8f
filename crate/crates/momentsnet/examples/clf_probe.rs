// probe: classifier hyperparameters on fixed extracted features
use momentsnet::config::ExperimentConfig;
use momentsnet::experiment::run_experiment;

fn main() {
    for (c, epochs) in [(1.0, 40usize), (1.0, 150), (10.0, 60), (100.0, 60), (0.1, 60)] {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_kv("seed", "7").unwrap();
        cfg.apply_kv("auto-threshold", "true").unwrap();
        cfg.apply_kv("c", &c.to_string()).unwrap();
        cfg.apply_kv("epochs", &epochs.to_string()).unwrap();
        cfg.resolve_convention();
        let (outcome, _, timings, _) = run_experiment(&cfg).unwrap();
        println!(
            "C={c:6} epochs={epochs:3}: train {:.4} test {:.4} [{:.1}s train]",
            outcome.train_acc, outcome.test_acc, timings.train
        );
    }
}
