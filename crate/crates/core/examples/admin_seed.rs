//! The operator tool driven as a library: seed a data directory, add a
//! customer, present a cheque and verify the journal.
//!
//! ```text
//! cargo run --example admin_seed
//! ```

use netbank::admin::run;

fn main() {
    let dir = std::env::temp_dir().join(format!("netbank-admin-{}", std::process::id()));
    let dir = dir.to_string_lossy().into_owned();
    let steps: &[&[&str]] = &[
        &["seed"],
        &["seed"],
        &[
            "customer",
            "add",
            "--username",
            "bob",
            "--password",
            "bob-secret",
            "--full-name",
            "Bob Ray",
            "--email",
            "bob@example.com",
            "--opening-current",
            "75.00",
        ],
        &["corporation", "list"],
        &["cheque", "present", "000001", "30.00"],
        &["cheque", "present", "000001", "30.00"],
        &["journal", "verify"],
    ];
    for step in steps {
        let args: Vec<&str> = ["netbank", "--data-dir", &dir].into_iter().chain(step.iter().copied()).collect();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args, &mut out, &mut err);
        print!("$ netbank {}\n{}{}", step.join(" "), String::from_utf8_lossy(&out), String::from_utf8_lossy(&err));
        println!("(exit {code})");
    }
    let _ = std::fs::remove_dir_all(&dir);
}
