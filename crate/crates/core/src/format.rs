//! Number formatting shared by the CSV and summary writers.

/// Rounds to 9 significant digits and prints the shortest representation of
/// the rounded value (`-14`, `8.75`, `19.3482143`).
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("scientific notation parses");
    rounded.to_string()
}
