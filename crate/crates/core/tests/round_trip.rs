use std::io::Write;

use liralab::fitting::{fit_beta_tlc, fit_dirichlet, generate_dataset, ingest_csv, DEFAULT_MAX_ITER, DEFAULT_TOL};
use liralab::uncertainty::{infer_profile_with_tolerance, profile_to_pair};
use liralab::{DirichletPair, Hypothesis, RngStream, UncertaintyProfile};

fn write_csv(rows: &[Vec<f64>]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    let k = rows[0].len();
    writeln!(f, "# synthetic").unwrap();
    let header: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
    writeln!(f, "{}", header.join(",")).unwrap();
    for r in rows {
        let line: Vec<String> = r.iter().map(|x| format!("{x:e}")).collect();
        writeln!(f, "{}", line.join(",")).unwrap();
    }
    f.flush().unwrap();
    f
}

#[test]
fn generate_write_ingest_fit_infer() {
    let truth = UncertaintyProfile::new(4, 0.3, 0.4, 0.1).unwrap();
    let pair = profile_to_pair(&truth).unwrap();
    let rng = RngStream::new(99, 0);
    let mut fitted = Vec::new();
    for (i, h) in [Hypothesis::Out, Hypothesis::In].into_iter().enumerate() {
        let data = generate_dataset(&pair, h, 40_000, &rng.child(i as u64)).unwrap();
        let file = write_csv(&data.rows);
        let read = ingest_csv(file.path(), 0.0, false).unwrap();
        assert_eq!(read.len(), data.len());
        for (a, b) in read.rows.iter().zip(&data.rows) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x, y, "CSV text must round-trip exactly");
            }
        }
        let fit = fit_dirichlet(&read, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(fit.converged);
        fitted.push(fit.gamma_hat);
    }
    for (hat, want) in fitted[0].iter().zip(pair.gamma_out()).chain(fitted[1].iter().zip(pair.gamma_in())) {
        assert!((hat - want).abs() / want < 0.05, "{hat} vs {want}");
    }
    let fitted_pair = DirichletPair::from_fitted(fitted[0].clone(), fitted[1].clone()).unwrap();
    let back = infer_profile_with_tolerance(&fitted_pair, 0.6, 0.05).unwrap();
    assert!((back.delta - 0.3).abs() / 0.3 < 0.1);
    assert!((back.eps_e - 0.1).abs() / 0.1 < 0.1);
}

#[test]
fn beta_fit_matches_true_label_marginal() {
    let truth = UncertaintyProfile::new(5, 0.2, 0.5, 0.2).unwrap();
    let pair = profile_to_pair(&truth).unwrap();
    let data = generate_dataset(&pair, Hypothesis::In, 40_000, &RngStream::new(3, 0)).unwrap();
    let fit = fit_beta_tlc(&data, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let marginal = pair.true_label_marginal();
    for (hat, want) in fit.gamma_hat.iter().zip(marginal.gamma_in()) {
        assert!((hat - want).abs() / want < 0.05, "{hat} vs {want}");
    }
}
