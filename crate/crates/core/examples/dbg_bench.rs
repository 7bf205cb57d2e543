use std::time::Instant;
use emosens_core::classifiers::{HyperParams, ModelTag};
use emosens_core::corpus::CorpusConfig;
use emosens_core::eval::cross_validate;
use emosens_core::pipeline::synthetic_benchmark;

fn main() {
    let t0 = Instant::now();
    let cfg = CorpusConfig::default();
    let (data, failures) = synthetic_benchmark(&cfg).unwrap();
    println!("extract: {} rows, {} failures, {:.1}s", data.len(), failures.len(), t0.elapsed().as_secs_f64());
    for f in failures.iter().take(5) { println!("  fail {} {}: {}", f.subject_id, f.trial_id, f.error); }

    let t1 = Instant::now();
    let gbdt = cross_validate(&data, ModelTag::Gbdt, &HyperParams::new(), 10).unwrap();
    println!("gbdt acc {:.4} ({:.1}s)", gbdt.mean_accuracy(), t1.elapsed().as_secs_f64());

    let t2 = Instant::now();
    let dt = cross_validate(&data, ModelTag::DecisionTree, &HyperParams::new(), 10).unwrap();
    println!("dt   acc {:.4} ({:.1}s)", dt.mean_accuracy(), t2.elapsed().as_secs_f64());

    let ada = cross_validate(&data, ModelTag::AdaBoost, &HyperParams::new(), 10).unwrap();
    println!("ada  acc {:.4}", ada.mean_accuracy());
    let gnb = cross_validate(&data, ModelTag::GaussianNb, &HyperParams::new(), 10).unwrap();
    println!("gnb  acc {:.4}", gnb.mean_accuracy());
    let rf = cross_validate(&data, ModelTag::RandomForest, &HyperParams::new(), 10).unwrap();
    println!("rf   acc {:.4}", rf.mean_accuracy());
    let knn = cross_validate(&data, ModelTag::Knn, &HyperParams::new(), 10).unwrap();
    println!("knn  acc {:.4}", knn.mean_accuracy());
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
