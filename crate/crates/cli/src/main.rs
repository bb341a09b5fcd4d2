fn main() { println!("plandist"); }
