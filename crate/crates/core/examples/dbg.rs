use annular_core::algebra::Algebra;
use annular_core::complex::{AnnularDiagram, BimoduleComplex};
use annular_core::khovanov;

fn main() {
    let d = AnnularDiagram::hopf_link();
    let alg = Algebra::new(0);
    let cx = BimoduleComplex::new(&alg, &alg, d.clone()).unwrap();
    let ic = cx.specialize(0, 0);
    println!("ours:");
    for g in ic.homology() {
        println!("  {:?}", g);
    }
    println!("oracle:");
    for g in khovanov::homology(&d).unwrap() {
        println!("  {:?}", g);
    }
    println!("skein: {:?}", d.skein_bracket());
    println!("kink+ oracle:");
    for g in khovanov::homology(&AnnularDiagram::kink(1)).unwrap() {
        println!("  {:?}", g);
    }
}
