use proptest::prelude::*;
use topic_privacy::corpus::Document;
use topic_privacy::lda::{estimate_theta, planted_topic_model, ThetaOptions};
use topic_privacy::stats::{kl_normal, query_statistics, shapiro_wilk, NormalFit};

#[test]
fn statistics_match_recomputation_from_theta() {
    for seed in 0..10 {
        let model = planted_topic_model(3, 12, 0.5, seed);
        let doc = Document::new(0, None, [(0, 3), (2, 1), (5, 4), (11, 2), (7, 1)]);
        let (theta, zeta) = estimate_theta(&model, &doc, ThetaOptions::default()).unwrap();
        let t = theta.weights();
        let stats = query_statistics(&model, &doc, ThetaOptions::default()).unwrap();

        let ll: f64 = doc
            .counts()
            .iter()
            .map(|&(w, c)| c as f64 * (0..3).map(|z| t[z] * model.prob(z, w)).sum::<f64>().ln())
            .sum();
        let neg_entropy: f64 = t.iter().map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 }).sum();
        let max = t.iter().cloned().fold(f64::MIN, f64::max);
        let logit = max.ln() - (1.0 - max).ln();
        let sd = (t.iter().map(|&p| (p - 1.0 / 3.0).powi(2)).sum::<f64>() / 3.0).sqrt();

        assert_eq!(stats.log_likelihood, zeta);
        assert!((stats.log_likelihood - ll).abs() < 1e-12);
        assert!((stats.neg_entropy - neg_entropy).abs() < 1e-12);
        assert!((stats.logit_max_posterior - logit).abs() < 1e-12);
        assert!((stats.std_dev - sd).abs() < 1e-12);
    }
}

/// Composite Simpson integral of `p log(p/q)` over ±12 standard deviations of `p`.
fn kl_quadrature(a: &NormalFit, b: &NormalFit) -> f64 {
    let (lo, hi) = (a.mean - 12.0 * a.std_dev(), a.mean + 12.0 * a.std_dev());
    let n = 20_000;
    let h = (hi - lo) / n as f64;
    let f = |x: f64| {
        let lp = a.log_pdf(x);
        lp.exp() * (lp - b.log_pdf(x))
    };
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

proptest! {
    #[test]
    fn kl_is_non_negative_and_matches_quadrature(
        m1 in -5.0f64..5.0, m2 in -5.0f64..5.0, v1 in 0.05f64..4.0, v2 in 0.05f64..4.0,
    ) {
        let a = NormalFit { mean: m1, variance: v1, n: 10 };
        let b = NormalFit { mean: m2, variance: v2, n: 10 };
        let kl = kl_normal(&a, &b);
        prop_assert!(kl >= 0.0);
        prop_assert!((kl - kl_quadrature(&a, &b)).abs() <= 1e-3);
    }
}

#[test]
fn shapiro_wilk_matches_reference_on_normal_sample() {
    // numpy default_rng(2024).standard_normal(50); scipy.stats.shapiro gives
    // W = 0.9778314522015732, p = 0.4645754548442095.
    let x = [
        1.0288568739519013, 1.6419200406711503, 1.1467195295966137, -0.9731795154745656, -1.3928000963768683,
        0.06719635507109722, 0.8613509179404263, 0.509186798845688, 1.8102855742952833, 0.7508434731539183,
        0.6397595539314624, -0.7313225212292476, -1.1077170351272676, 1.4844055856837017, 0.048912403069534136,
        0.8115201169815576, -1.3764228399745688, -0.43637073584081926, -1.2910916333479945, -0.7756786842437912,
        0.9030630777436289, -1.4805813250203528, -0.5340928297145819, 0.16378857220098098, -0.6684703049155165,
        -0.25228975964635664, -0.22186154087661292, 0.4181385697197018, -0.43125454836060817, 0.27226068000682285,
        0.05681919548353432, 0.42456925614196805, 0.224943388070294, 1.6576840551979304, -0.6636760694670103,
        1.1991871656162354, -0.4026124264424147, -0.9579261729918135, 1.21119446936847, -0.43950590401335643,
        -0.3876358717280692, -1.3886836827516753, -2.0981967905109227, 0.6343009414440183, -1.1652663772886236,
        0.7782729899588319, 1.8481672953210666, -0.11479794585014706, -1.1266151030496365, 0.3941991740101531,
    ];
    let sw = shapiro_wilk(&x).unwrap();
    assert!((sw.w - 0.9778314522015732).abs() < 1e-6);
    assert!((sw.p_value - 0.4645754548442095).abs() < 1e-3);
}
