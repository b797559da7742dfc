//@ unit GlobalVar:labels
pub static LABELS: [i32; 4] = [10, 20, 30, 40];
