use qcflp::semantics::{check_certificate, check_proof, holds, write_certificate, HoldsVerdict, SearchLimits};
use qcflp::syntax::{parse_program, parse_statement, ParseOptions};
use qcflp::{Program, QualDomain};

const LIBRARY: &str = include_str!("data/library.qcflp");

fn library() -> Program {
    parse_program(LIBRARY, &ParseOptions::new(QualDomain::U)).unwrap()
}

fn book4() -> &'static str {
    r#"book(4, "Beim Hauten der Zwiebel", "Gunter Grass", "German", "Biography", medium, 432)"#
}

fn prove(p: &Program, src: &str) -> HoldsVerdict {
    let s = parse_statement(src, Some(p)).unwrap();
    holds(p, &QualDomain::U, &s, SearchLimits::default())
}

#[test]
fn guess_genre_essay_at_07_is_derivable() {
    let p = library();
    let src = format!(r#"(guessGenre({}) -> "Essay") # 0.7"#, book4());
    let HoldsVerdict::Derivable(tree) = prove(&p, &src) else {
        panic!("expected a proof")
    };
    assert!(check_proof(&p, &QualDomain::U, &tree).is_valid());
    assert_eq!(tree.rule, Some(14), "fourth guessGenre rule");
    let stmt = parse_statement(&src, Some(&p)).unwrap();
    let cert = write_certificate(&stmt, &tree);
    assert!(check_certificate(&p, &QualDomain::U, &cert).is_valid(), "{cert}");
}

#[test]
fn guess_genre_essay_at_075_is_not_found() {
    let p = library();
    let src = format!(r#"(guessGenre({}) -> "Essay") # 0.75"#, book4());
    assert_eq!(prove(&p, &src), HoldsVerdict::NotFound);
}

#[test]
fn variable_reduces_to_itself() {
    let p = Program::default();
    for d in ["0.3", "1"] {
        let v = prove(&p, &format!("(X -> X) # {d}"));
        assert!(matches!(v, HoldsVerdict::Derivable(_)), "{v:?}");
    }
}

#[test]
fn undefined_symbol_is_not_found() {
    let p = parse_program("g -0.9-> true", &ParseOptions::new(QualDomain::U)).unwrap();
    assert_eq!(prove(&p, "(f -> true) # 0.95"), HoldsVerdict::NotFound);
    assert!(matches!(prove(&p, "(g -> true) # 0.9"), HoldsVerdict::Derivable(_)));
    assert_eq!(prove(&p, "(g -> true) # 0.95"), HoldsVerdict::NotFound);
}
