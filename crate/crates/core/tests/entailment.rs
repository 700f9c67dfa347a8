use qcflp::semantics::{entailment_checks, qc_entails};
use qcflp::syntax::{parse_expr, parse_statement};
use qcflp::{QualDomain, Var};

const PHI: &str = "(f(X:Xs) -> Xs) # 0.8 <== X*X /= 0";
const PHI2: &str = "(f(A:(B:[])) -> _|_ : _|_) # 0.7 <== A < 0";

#[test]
fn list_statements_entail_with_expected_substitution() {
    let phi = parse_statement(PHI, None).unwrap();
    let phi2 = parse_statement(PHI2, None).unwrap();
    let sigma = qc_entails(&QualDomain::U, &phi, &phi2).expect("entailed");
    assert_eq!(sigma.get(&Var::new("X")), Some(&parse_expr("A").unwrap()));
    assert_eq!(sigma.get(&Var::new("Xs")), Some(&parse_expr("B : _|_").unwrap()));
    let checks = entailment_checks(&QualDomain::U, &phi, &phi2, &sigma);
    assert!(checks.constraints);
    assert!(checks.qualification);
    assert!(checks.orderings);
}

#[test]
fn higher_qualification_is_not_entailed() {
    let phi = parse_statement(PHI, None).unwrap();
    let stronger = parse_statement("(f(A:(B:[])) -> _|_ : _|_) # 0.9 <== A < 0", None).unwrap();
    assert_eq!(qc_entails(&QualDomain::U, &phi, &stronger), None);
}

#[test]
fn constraint_must_be_entailed() {
    let phi = parse_statement(PHI, None).unwrap();
    let weak = parse_statement("(f(A:(B:[])) -> _|_ : _|_) # 0.7 <== A < 1", None).unwrap();
    assert_eq!(qc_entails(&QualDomain::U, &phi, &weak), None);
}

#[test]
fn more_defined_result_is_not_entailed() {
    let phi = parse_statement(PHI, None).unwrap();
    let defined = parse_statement("(f(A:(B:[])) -> 1 : []) # 0.7 <== A < 0", None).unwrap();
    assert_eq!(qc_entails(&QualDomain::U, &phi, &defined), None);
}
