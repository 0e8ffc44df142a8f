// probe: net vs raw-moment baseline across seeds at equal training settings
use momentsnet::classifier::{self, TrainParams};
use momentsnet::config::ExperimentConfig;
use momentsnet::data::split;
use momentsnet::experiment::{raw_moment_features, resolve_dataset, run_experiment};
use momentsnet::kernels::MomentFamily;

fn main() {
    let epochs = 150usize;
    for seed in [7u64, 0, 1] {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_kv("seed", &seed.to_string()).unwrap();
        cfg.apply_kv("auto-threshold", "true").unwrap();
        cfg.apply_kv("epochs", &epochs.to_string()).unwrap();
        cfg.resolve_convention();

        let (outcome, _, _, _) = run_experiment(&cfg).unwrap();

        let dataset = resolve_dataset(&cfg).unwrap();
        let (train, test) = split(&dataset, 0.5, seed).unwrap();
        let train_feats = raw_moment_features(&train.images, &MomentFamily::Zernike, 16).unwrap();
        let test_feats = raw_moment_features(&test.images, &MomentFamily::Zernike, 16).unwrap();
        let train_labels: Vec<u32> = train.images.iter().map(|i| i.label.unwrap()).collect();
        let test_labels: Vec<u32> = test.images.iter().map(|i| i.label.unwrap()).collect();
        let tr: Vec<&[f32]> = train_feats.iter().map(|f| f.as_slice()).collect();
        let te: Vec<&[f32]> = test_feats.iter().map(|f| f.as_slice()).collect();
        let params = TrainParams { c: 1.0, max_epochs: epochs, seed };
        let model = classifier::train(&tr, &train_labels, &params).unwrap();
        let raw_tr = classifier::accuracy(&model, &tr, &train_labels).unwrap();
        let raw_acc = classifier::accuracy(&model, &te, &test_labels).unwrap();
        println!(
            "seed {seed}: net {:.4} raw {:.4} (margin {:+.4}; raw train {:.4})",
            outcome.test_acc, raw_acc, outcome.test_acc - raw_acc, raw_tr
        );
    }
}
