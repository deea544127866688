//! Copy and discard on classical types, and causality of values.

use qpl::ast::Type;
use qpl::parser::pretty::value_to_string;
use qpl::verify::{causality_error, comonoid_errors, copyability_error, sample_values};

fn main() {
    for (t, k) in [(Type::bit(), 8), (Type::nat(), 6), (Type::list(Type::bit()), 4)] {
        let e = comonoid_errors(&t, k).unwrap();
        println!("{t} at depth {k}: {e:?}");
    }
    for v in sample_values(&Type::list_q(), 4, 4, 1) {
        println!("{}: causality error {:.1e}", value_to_string(&v), causality_error(&v, 4).unwrap());
    }
    for v in sample_values(&Type::nat(), 4, 4, 2) {
        println!("{}: copy error {:.1e}", value_to_string(&v), copyability_error(&v, 4).unwrap());
    }
}
