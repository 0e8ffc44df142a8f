// probe: per-class confusion for net vs raw features
use momentsnet::classifier::{self, TrainParams};
use momentsnet::config::ExperimentConfig;
use momentsnet::data::split;
use momentsnet::experiment::{raw_moment_features, resolve_dataset, run_experiment};
use momentsnet::kernels::MomentFamily;

fn main() {
    let seed = 7u64;
    let mut cfg = ExperimentConfig::default();
    cfg.apply_kv("seed", &seed.to_string()).unwrap();
    cfg.apply_kv("auto-threshold", "true").unwrap();
    cfg.apply_kv("epochs", "120").unwrap();
    cfg.resolve_convention();

    let dataset = resolve_dataset(&cfg).unwrap();
    let names = dataset.class_names.clone();
    let (train, test) = split(&dataset, 0.5, seed).unwrap();
    let test_labels: Vec<u32> = test.images.iter().map(|i| i.label.unwrap()).collect();

    // Net predictions
    let (_, model, _, feats) = run_experiment(&cfg).unwrap();
    let mut net_wrong = vec![0usize; 9];
    for (f, &y) in feats.test.iter().zip(&test_labels) {
        if model.predict(&f.values).unwrap() != y {
            net_wrong[y as usize] += 1;
        }
    }

    // Raw predictions
    let train_feats = raw_moment_features(&train.images, &MomentFamily::Zernike, 16).unwrap();
    let test_feats = raw_moment_features(&test.images, &MomentFamily::Zernike, 16).unwrap();
    let train_labels: Vec<u32> = train.images.iter().map(|i| i.label.unwrap()).collect();
    let tr: Vec<&[f32]> = train_feats.iter().map(|f| f.as_slice()).collect();
    let params = TrainParams { c: 1.0, max_epochs: 120, seed };
    let raw_model = classifier::train(&tr, &train_labels, &params).unwrap();
    let mut raw_wrong = vec![0usize; 9];
    let mut confusion = vec![[0usize; 9]; 9];
    for (f, &y) in test_feats.iter().zip(&test_labels) {
        let p = raw_model.predict(f).unwrap();
        confusion[y as usize][p as usize] += 1;
        if p != y {
            raw_wrong[y as usize] += 1;
        }
    }
    println!("class         net_wrong raw_wrong (of 72)");
    for i in 0..9 {
        println!("{:12} {:9} {:9}", names[i], net_wrong[i], raw_wrong[i]);
    }
}
