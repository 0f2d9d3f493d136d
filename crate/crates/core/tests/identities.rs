use lozenge_core::enumerate::tgf;
use lozenge_core::exactalg::{rat, LaurentPoly};
use lozenge_core::identities::*;
use lozenge_core::qformulas::{pp_q_poly, BaseDents, Quartered, TwoSided};
use lozenge_core::regions::{build_q, build_s, CalibrationTable, Cell};

fn table() -> CalibrationTable {
    CalibrationTable::builtin()
}

#[test]
fn quartered_with_first_dent_has_one_tiling() {
    let r = build_q(1, &Quartered::new(vec![1]).unwrap()).unwrap();
    assert!(tgf(&r).is_one());
}

#[test]
fn small_box_formula() {
    assert_eq!(pp_q_poly(1, 1, 1), "1 + q".parse::<LaurentPoly>().unwrap());
    assert!(check_macmahon(2, 2, 2).passed());
    assert_eq!(pp_q_poly(2, 2, 2).coefficient_sum(), rat(20, 1));
}

#[test]
fn ratio_checks_on_single_instances() {
    let t = table();
    let s = Dents::TwoSided(TwoSided::new(vec![2, 3], vec![1, 4]).unwrap());
    assert!(check_ratio(RatioKind::S, 1, 3, &s, &t).unwrap().passed());
    let q = Dents::Quartered(Quartered::new(vec![2, 3, 6]).unwrap());
    assert!(check_ratio(RatioKind::Q, 3, 0, &q, &t).unwrap().passed());
    assert!(check_ratio(RatioKind::Qprime, 2, 1, &q, &t).unwrap().passed());
    assert!(check_ratio(RatioKind::S, 0, 1, &q, &t).is_err());
}

#[test]
fn primed_two_sided_ratio_is_inconclusive_under_the_placeholder_scheme() {
    let s = Dents::TwoSided(TwoSided::new(vec![], vec![1]).unwrap());
    let rep = check_ratio(RatioKind::Sprime, 0, 1, &s, &table()).unwrap();
    assert_eq!(rep.verdict, Verdict::Inconclusive);
}

#[test]
fn closed_forms() {
    let t = table();
    let base = LemmaParams::Base(BaseDents::new(2, 2, vec![1, 4]).unwrap());
    assert!(check_lemma_formula(LemmaKind::Sbase, &base, &t).unwrap().passed());
    assert!(check_lemma_formula(LemmaKind::SprimeBase, &base, &t).unwrap().passed());
    let halved = LemmaParams::Halved { x: 2, n: 3 };
    assert!(check_lemma_formula(LemmaKind::P, &halved, &t).unwrap().passed());
    assert!(check_lemma_formula(LemmaKind::Pprime, &halved, &t).unwrap().passed());
}

#[test]
fn condensation_selections() {
    let (r, sel) = kuo_selection_s(1, &TwoSided::new(vec![2, 3], vec![2]).unwrap()).unwrap();
    let rep = check_kuo(&r, &sel).unwrap();
    assert!(rep.passed(), "{}", rep.summary());
    assert!(rep.detail.contains("M(G-vw)M(G-vs)"));
    let (r, sel) = kuo_selection_q(2, &Quartered::new(vec![3, 5, 6]).unwrap()).unwrap();
    assert!(check_kuo(&r, &sel).unwrap().passed());
    for (r, sel) in random_kuo_cases(12, 7) {
        assert!(check_kuo(&r, &sel).unwrap().passed());
    }
}

#[test]
fn random_cases_are_reproducible() {
    let a: Vec<_> = random_kuo_cases(6, 3).into_iter().map(|(_, s)| s).collect();
    let b: Vec<_> = random_kuo_cases(6, 3).into_iter().map(|(_, s)| s).collect();
    assert_eq!(a, b);
}

#[test]
fn selections_off_the_boundary_are_rejected() {
    let r = build_s(2, &TwoSided::new(vec![2, 3], vec![1, 4]).unwrap()).unwrap();
    let sel = KuoSelection {
        u: Cell::up(1, -1),
        v: Cell::down(1, 0),
        w: Cell::up(3, 1),
        s: Cell::down(4, -3),
        variant: KuoVariant::Balanced,
    };
    assert!(matches!(check_kuo(&r, &sel), Err(CheckError::Selection(_))));
}

#[test]
fn recurrences() {
    assert!(check_recurrence_s(1, &TwoSided::new(vec![2, 3], vec![2]).unwrap()).unwrap().passed());
    assert!(check_recurrence_q(1, &Quartered::new(vec![3, 5, 6]).unwrap()).unwrap().passed());
    let base = BaseRecurrence::Sbase(BaseDents::new(1, 2, vec![1, 3]).unwrap());
    assert!(check_recurrence_base(&base).unwrap().passed());
}

#[test]
fn halved_hexagon_recurrence_fails_as_stated() {
    let rep = check_recurrence_base(&BaseRecurrence::P { x: 1, n: 2 }).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    assert!(rep.detail.contains("closed product formulas satisfy it: false"));
}

#[test]
fn symmetric_tilings() {
    assert!(check_symmetric_decomposition(2, &[2]).unwrap().passed());
    let rep = check_symmetric_decomposition(1, &[3, 4]).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    assert!(rep.detail.contains("symmetric count is 2 and the quartered count is 2"));
    assert!(check_symmetric_decomposition(1, &[1, 4]).is_err());
}

#[test]
fn splitting() {
    let q = build_q(1, &Quartered::new(vec![2, 3]).unwrap()).unwrap();
    assert!(check_region_splitting(&q, &top_rows(&q, 2)).unwrap().passed());
    let s = build_s(1, &TwoSided::new(vec![1], vec![2]).unwrap()).unwrap();
    assert!(check_region_splitting(&s, &top_rows(&s, 1)).unwrap().passed());
    // The first row of this region carries no dent, so it has one more up triangle than down.
    let s = build_s(1, &TwoSided::new(vec![3], vec![2, 3]).unwrap()).unwrap();
    assert!(check_region_splitting(&s, &top_rows(&s, 1)).is_err());
}

#[test]
fn reciprocity() {
    assert!(check_reciprocity(3, 1, &Quartered::new(vec![1, 4]).unwrap()).passed());
}

#[test]
fn shipped_calibration_table_is_reproducible() {
    let (fresh, outcomes) = calibrate_all(3, &table());
    assert_eq!(fresh, table());
    let sprime = outcomes.iter().find(|o| o.kind == CalibrationKind::Sprime).unwrap();
    assert!(sprime.survivors.is_empty());
    assert_eq!(sprime.rejected.len(), candidate_schemes(CalibrationKind::Sprime).len());
}

#[test]
fn reports_serialise_without_timing() {
    let rep = check_macmahon(1, 1, 1);
    let text = serde_json::to_string(&rep).unwrap();
    assert!(!text.contains("elapsed"));
    assert!(text.contains("\"verdict\":\"PASS\""));
}
