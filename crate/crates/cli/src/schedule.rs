//! The `schedule` subcommand.
//!
//! With `--at` it only prints the lines a user would paste into their
//! scheduler of choice; it never starts anything itself. With
//! `--wait-until` it becomes that scheduler: sleep until the time of day
//! arrives, then run the command and pass its exit status through.

use std::process::ExitCode;

use crate::ScheduleArgs;

/// Strict `HH:MM`: two digits, colon, two digits, 24-hour range.
fn parse_time(text: &str) -> Option<(u32, u32)> {
    let bytes = text.as_bytes();
    if bytes.len() != 5 || bytes[2] != b':' {
        return None;
    }
    if !bytes[0].is_ascii_digit()
        || !bytes[1].is_ascii_digit()
        || !bytes[3].is_ascii_digit()
        || !bytes[4].is_ascii_digit()
    {
        return None;
    }
    let hour: u32 = text[0..2].parse().ok()?;
    let minute: u32 = text[3..5].parse().ok()?;
    if hour > 23 || minute > 59 {
        return None;
    }
    Some((hour, minute))
}

/// Quotes one argument for a POSIX shell line. Bare only when it cannot be
/// misread.
fn sh_quote(arg: &str) -> String {
    let safe = !arg.is_empty()
        && arg
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b"_-./:=,".contains(&b));
    if safe {
        arg.to_string()
    } else {
        format!("'{}'", arg.replace('\'', "'\\''"))
    }
}

fn render_command(command: &[String]) -> String {
    command
        .iter()
        .map(|a| sh_quote(a))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Seconds from now until the next occurrence of `HH:MM`. The current
/// minute counts as now; an already-finished minute means tomorrow.
fn seconds_until(now_hour: u32, now_minute: u32, now_second: u32, hour: u32, minute: u32) -> u64 {
    if (now_hour, now_minute) == (hour, minute) {
        return 0;
    }
    let now = u64::from(now_hour) * 3600 + u64::from(now_minute) * 60 + u64::from(now_second);
    let target = u64::from(hour) * 3600 + u64::from(minute) * 60;
    if target >= now {
        target - now
    } else {
        24 * 3600 - now + target
    }
}

pub fn execute(args: ScheduleArgs) -> anyhow::Result<ExitCode> {
    if let Some(at) = &args.at {
        let Some((hour, minute)) = parse_time(at) else {
            eprintln!("error: \"{at}\" is not a valid time, expected HH:MM (24h)");
            return Ok(ExitCode::from(2));
        };
        let time = format!("{hour:02}:{minute:02}");
        let rendered = render_command(&args.command);
        // Three ways to start the same run later; nothing is executed here.
        println!("at {time} {rendered}");
        println!("echo \"{}\" | at {time}", rendered.replace('"', "\\\""));
        println!("snowleopard schedule --wait-until {time} -- {rendered}");
        return Ok(ExitCode::SUCCESS);
    }

    let wait_until = args
        .wait_until
        .as_deref()
        .expect("clap requires --at or --wait-until");
    let Some((hour, minute)) = parse_time(wait_until) else {
        eprintln!("error: \"{wait_until}\" is not a valid time, expected HH:MM (24h)");
        return Ok(ExitCode::from(2));
    };

    // A target equal to the current minute means now.
    let now = time_of_day();
    let wait = seconds_until(now.0, now.1, now.2, hour, minute);
    if wait > 0 {
        std::thread::sleep(std::time::Duration::from_secs(wait));
    }

    let status = std::process::Command::new(&args.command[0])
        .args(&args.command[1..])
        .status()
        .map_err(|e| anyhow::anyhow!("starting {}: {e}", args.command[0]))?;
    Ok(ExitCode::from(status.code().unwrap_or(1) as u8))
}

fn time_of_day() -> (u32, u32, u32) {
    use chrono::Timelike;
    let now = chrono::Local::now();
    (now.hour(), now.minute(), now.second())
}
