use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use netbank::admin::DirLock;
use netbank::journal::JOURNAL_FILE;

fn netbank(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netbank"))
        .arg("--data-dir")
        .arg(dir)
        .args(args)
        .env_remove("BANK_DATA_DIR")
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn seed_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bank");
    let seeded = netbank(&data, &["seed"]);
    assert!(seeded.status.success(), "{}", stderr(&seeded));
    assert!(stdout(&seeded).contains("(9 events)"));

    let again = netbank(&data, &["seed"]);
    assert_eq!(again.status.code(), Some(1));
    assert!(stderr(&again).starts_with("error: dir-not-empty:"));

    let verify = netbank(&data, &["journal", "verify"]);
    assert!(verify.status.success());
    assert!(stdout(&verify).starts_with("ok: 9 events"));
}

#[test]
fn cheque_presentation_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    assert!(netbank(dir.path(), &["seed"]).status.success());
    let cleared = netbank(dir.path(), &["cheque", "present", "000001", "25.00"]);
    assert!(stdout(&cleared).starts_with("cleared TX"), "{}", stderr(&cleared));
    let twice = netbank(dir.path(), &["cheque", "present", "000001", "25.00"]);
    assert_eq!(twice.status.code(), Some(1));
    assert!(stderr(&twice).contains("terminal-state"));
    assert_eq!(stdout(&netbank(dir.path(), &["cheque", "present", "000002", "99999.00"])), "bounced\n");
    let bad = netbank(dir.path(), &["cheque", "present", "12", "1.00"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(netbank(dir.path(), &["journal", "verify"]).status.success());
}

#[test]
fn customers_corporations_and_books() {
    let dir = tempfile::tempdir().unwrap();
    assert!(netbank(dir.path(), &["seed"]).status.success());
    let add = netbank(
        dir.path(),
        &[
            "customer",
            "add",
            "--username",
            "bob",
            "--password",
            "bobs-secret",
            "--full-name",
            "Bob",
            "--email",
            "bob@x.org",
            "--opening-current",
            "10.00",
        ],
    );
    assert!(add.status.success(), "{}", stderr(&add));
    assert!(stdout(&add).starts_with("CUS000002 bob"));
    let weak =
        netbank(dir.path(), &["customer", "add", "--username", "eve", "--password", "12345", "--full-name", "Eve", "--email", "eve@x.org"]);
    assert!(stderr(&weak).contains("policy-violation"));
    assert!(netbank(dir.path(), &["customer", "unlock", "bob"]).status.success());

    let corp = netbank(dir.path(), &["corporation", "add", "Gas Co"]);
    let id = stdout(&corp).split_whitespace().next().unwrap().to_string();
    assert!(netbank(dir.path(), &["corporation", "deactivate", &id]).status.success());
    let list = stdout(&netbank(dir.path(), &["corporation", "list", "--all"]));
    assert!(list.contains(&format!("{id} inactive Gas Co")));
    assert!(!stdout(&netbank(dir.path(), &["corporation", "list"])).contains("Gas Co"));

    assert_eq!(stdout(&netbank(dir.path(), &["cheque-book", "list"])), "");
    let missing = netbank(dir.path(), &["cheque-book", "fulfill", "CB9999"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(netbank(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(netbank(dir.path(), &["cheque", "present"]).status.code(), Some(2));
    let help = netbank(dir.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("journal"));
    let bad_env = Command::new(env!("CARGO_BIN_EXE_netbank"))
        .args(["--data-dir", dir.path().to_str().unwrap(), "journal", "verify"])
        .env("BANK_CURRENCY", "dollars")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
    assert!(stderr(&bad_env).contains("bad-config"));
}

#[test]
fn mid_journal_corruption_fails_verify() {
    let dir = tempfile::tempdir().unwrap();
    assert!(netbank(dir.path(), &["seed"]).status.success());
    let path = dir.path().join(JOURNAL_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let corp = lines.iter().position(|l| l.contains("City Power")).unwrap();
    assert!(corp + 1 < lines.len());
    lines[corp] = lines[corp].replace("Power", "Tower");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let verify = netbank(dir.path(), &["journal", "verify"]);
    assert_eq!(verify.status.code(), Some(1));
    assert!(stderr(&verify).contains("checksum-mismatch"), "{}", stderr(&verify));
}

#[test]
fn torn_tail_is_reported_but_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    assert!(netbank(dir.path(), &["seed"]).status.success());
    let path = dir.path().join(JOURNAL_FILE);
    let mut bytes = fs::read(&path).unwrap();
    bytes.extend_from_slice(b"1234abcd {\"kin");
    fs::write(&path, bytes).unwrap();
    let verify = netbank(dir.path(), &["journal", "verify"]);
    assert!(verify.status.success());
    assert!(stdout(&verify).contains("torn final line (14 bytes)"));
}

#[test]
fn snapshot_and_compact() {
    let dir = tempfile::tempdir().unwrap();
    assert!(netbank(dir.path(), &["seed"]).status.success());
    let snap = netbank(dir.path(), &["journal", "snapshot", "--compact"]);
    assert!(snap.status.success(), "{}", stderr(&snap));
    assert!(stdout(&snap).contains("at sequence 9"));
    assert_eq!(fs::metadata(dir.path().join(JOURNAL_FILE)).unwrap().len(), 0);
    assert!(netbank(dir.path(), &["cheque", "present", "000003", "1.00"]).status.success());
    // the first clearing also opens the bank's clearing account
    assert!(stdout(&netbank(dir.path(), &["journal", "verify"])).starts_with("ok: 11 events"));
}

#[test]
fn a_locked_data_dir_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    assert!(netbank(dir.path(), &["seed"]).status.success());
    let lock = DirLock::acquire(dir.path()).unwrap();
    let blocked = netbank(dir.path(), &["cheque", "present", "000001", "1.00"]);
    assert_eq!(blocked.status.code(), Some(1));
    assert!(stderr(&blocked).contains("data-dir-locked"));
    drop(lock);
    assert!(netbank(dir.path(), &["cheque", "present", "000001", "1.00"]).status.success());
}
