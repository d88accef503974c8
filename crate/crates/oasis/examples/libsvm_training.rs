//! End-to-end training from a sparse text dataset: write a small file in
//! the `label index:value` format, load it back, split train/test, fit a
//! regularized logistic regression with the adaptive method, and report
//! accuracy on both splits.

use std::path::Path;

use oasis::dataio::{load_libsvm, save_libsvm, synth_classification, train_test_split};
use oasis::error::Result;
use oasis::linalg::Rng;
use oasis::optimizers::{BatchSpec, Hyper, OasisMode, OasisOptimizer, Optimizer};
use oasis::problems::{LogisticRegression, Objective};

fn main() -> Result<()> {
    let out = Path::new("target/examples_out");
    std::fs::create_dir_all(out)?;
    let path = out.join("demo.libsvm");

    // Synthesize a separable-ish classification set and round-trip it
    // through the text format.
    let mut rng = Rng::new(42);
    let (x, y) = synth_classification(300, 15, 1.2, 0.7, &mut rng)?;
    save_libsvm(&path, &x, &y)?;
    let (x, y) = load_libsvm(&path, None)?;
    println!(
        "loaded {}: {} samples, {} features, {} nonzeros",
        path.display(),
        x.n_rows(),
        x.n_cols(),
        x.nnz()
    );

    let (x_train, y_train, x_test, y_test) = train_test_split(&x, &y, 0.25, &mut rng)?;
    let n_train = x_train.n_rows();
    let train = LogisticRegression::new(x_train, y_train, 1.0 / n_train as f64)?;
    let test = LogisticRegression::new(x_test, y_test, 1e-12)?;

    let w0 = vec![0.0; train.dim()];
    let mut opt = OasisOptimizer::new(&train, w0, OasisMode::Adaptive, Hyper::default(), &mut rng)?;
    let batch = BatchSpec::full();
    for k in 0..40 {
        opt.step(&train, &mut rng, &batch)?;
        if (k + 1) % 10 == 0 {
            println!(
                "iter {:>2}: F = {:.6}, train accuracy {:.3}, eta = {:.4e}",
                k + 1,
                train.value(opt.w(), None),
                train.classification_accuracy(opt.w(), None).unwrap(),
                opt.eta()
            );
        }
    }
    println!(
        "final: train accuracy {:.3}, test accuracy {:.3} ({} effective passes)",
        train.classification_accuracy(opt.w(), None).unwrap(),
        test.classification_accuracy(opt.w(), None).unwrap(),
        opt.passes()
    );
    Ok(())
}
