use std::io::Read;

// Minimal DIMACS CNF front end for the bundled CDCL solver.
// Prints "s SATISFIABLE" with "v" model lines, or "s UNSATISFIABLE".
// Exit codes follow the SAT-competition convention: 10 sat, 20 unsat.
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let path = args.get(1).expect("usage: cnfsolve FILE.cnf");
    let mut text = String::new();
    std::fs::File::open(path)
        .expect("open cnf")
        .read_to_string(&mut text)
        .expect("read cnf");
    let mut solver: cadical::Solver = Default::default();
    let mut nvars: i32 = 0;
    let mut clause: Vec<i32> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('p') {
            if line.starts_with('p') {
                let f: Vec<&str> = line.split_whitespace().collect();
                nvars = f[2].parse().unwrap();
            }
            continue;
        }
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().expect("lit");
            if lit == 0 {
                solver.add_clause(clause.drain(..));
            } else {
                clause.push(lit);
            }
        }
    }
    match solver.solve() {
        Some(true) => {
            println!("s SATISFIABLE");
            let mut out = String::from("v");
            for v in 1..=nvars {
                let val = solver.value(v).unwrap_or(false);
                out.push(' ');
                if !val {
                    out.push('-');
                }
                out.push_str(&v.to_string());
            }
            out.push_str(" 0");
            println!("{}", out);
            std::process::exit(10);
        }
        Some(false) => {
            println!("s UNSATISFIABLE");
            std::process::exit(20);
        }
        None => {
            println!("s UNKNOWN");
            std::process::exit(0);
        }
    }
}
