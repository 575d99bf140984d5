//! Acceptance suite. Runs every primary criterion at its stated tolerance
//! and time budget and prints one PASS or FAIL line per criterion.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use altcanvas_cli::{cmd_replay, ReplayArgs};
use altcanvas_core::engine::{Command, Editor, Mode, SessionState};
use altcanvas_core::feedback::{radar_scan, size_to_frequency, SonificationParams};
use altcanvas_core::genai::{templates, MockBackend};
use altcanvas_core::persist;
use altcanvas_core::render::edges::sobel_gradients;
use altcanvas_core::render::{canny_edges, sobel_edges, EdgeAlgorithm, EdgeParams, RasterImage};
use altcanvas_core::scene::{ResizeDirection, ResizeOutcome, MOVE_STEP, RESIZE_STEP};
use altcanvas_core::store::MemoryStore;
use altcanvas_core::tiles::{Tile, PUSH_STEP};
use altcanvas_core::{
    CanvasConfig, Direction, FeedbackEvent, ImageStyle, ObjectId, Point, Scene, SceneObject, Size2D, TileCoord,
    TileGrid,
};
use altcanvas_service::{router, AppState, ServiceConfig};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use altcanvas_core::store::content_hash as sha256_hex;
use tower::ServiceExt;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
    /// Criteria that cannot hold as written; they still run and print FAIL
    /// but do not fail the suite.
    unattainable: bool,
}

fn main() {
    let criteria = [
        Criterion { name: "first placement", budget: secs(1), run: first_placement, unattainable: false },
        Criterion { name: "step sizes", budget: secs(5), run: step_sizes, unattainable: false },
        Criterion { name: "overlap oracle", budget: secs(10), run: overlap_oracle, unattainable: false },
        Criterion { name: "tile invariants fuzz", budget: secs(30), run: tile_fuzz, unattainable: false },
        Criterion { name: "radar conformance", budget: secs(5), run: radar, unattainable: false },
        Criterion { name: "replay determinism", budget: secs(10), run: replay_determinism, unattainable: false },
        Criterion { name: "prompt template fidelity", budget: secs(1), run: template_fidelity, unattainable: false },
        Criterion { name: "sobel correctness", budget: secs(5), run: sobel_correctness, unattainable: true },
        Criterion { name: "canny correctness", budget: secs(5), run: canny_correctness, unattainable: false },
        Criterion { name: "sonification monotonicity", budget: secs(1), run: sonification, unattainable: false },
        Criterion { name: "persistence", budget: secs(30), run: persistence, unattainable: false },
        Criterion { name: "service linearizability hammer", budget: secs(60), run: hammer, unattainable: false },
    ];
    let (mut passed, mut failed, mut blocking) = (0, 0, 0);
    for c in &criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > c.budget => Err(format!("took {elapsed:.2?}, budget {:?}", c.budget)),
            other => other,
        };
        match result {
            Ok(detail) => {
                passed += 1;
                println!("PASS  {:<32} {:>9.2?}  {detail}", c.name, elapsed);
            }
            Err(why) => {
                failed += 1;
                if !c.unattainable {
                    blocking += 1;
                }
                let note = if c.unattainable { " [unattainable as specified]" } else { "" };
                println!("FAIL  {:<32} {:>9.2?}  {why}{note}", c.name, elapsed);
            }
        }
    }
    println!("\n{passed} passed, {failed} failed, {blocking} blocking");
    if blocking > 0 {
        std::process::exit(1);
    }
}

fn secs(n: u64) -> Duration {
    Duration::from_secs(n)
}

fn editor(config: CanvasConfig, seed: u64) -> Editor {
    Editor::fresh(config, seed, Arc::new(MockBackend::new(seed)), Arc::new(MemoryStore::new()))
}

fn generate(e: &mut Editor, text: &str) -> Vec<FeedbackEvent> {
    e.submit(Command::Enter);
    e.submit(Command::TranscriptArrived { text: text.into() });
    e.submit(Command::Enter).into_iter().flat_map(|(_, ev)| ev).collect()
}

fn first_placement() -> Outcome {
    let mut e = editor(CanvasConfig::default(), 0);
    let events = generate(&mut e, "Create an image of a dog");
    let dog = &e.state.scene.objects()[0];
    ensure!(dog.top_left() == Point::new(250, 250), "top-left {:?}", dog.top_left());
    ensure!((dog.size.width, dog.size.height) == (100, 100), "size {:?}", dog.size);
    let spoken = events.iter().filter_map(FeedbackEvent::text).find(|t| t.contains("has been generated"));
    let spoken = spoken.ok_or("no generation announcement")?;
    ensure!(spoken.contains("The coordinates of the image are 250 by 250."), "announced `{spoken}`");
    Ok("\"250 by 250\"".into())
}

fn step_sizes() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut violations = Vec::new();

    let mut e = editor(CanvasConfig::default(), 3);
    generate(&mut e, "a dog");
    let id = e.state.scene.objects()[0].id;
    e.submit(Command::ShiftL);
    for _ in 0..1000 {
        let d = Direction::ALL[rng.random_range(0..4)];
        let before = e.state.scene.get(id).unwrap().center;
        e.submit(Command::Arrow { direction: d });
        let after = e.state.scene.get(id).unwrap().center;
        let (dx, dy) = d.delta();
        let expected = Point::new(before.x + dx * MOVE_STEP, before.y + dy * MOVE_STEP);
        let mut probe = e.state.scene.get(id).unwrap().clone();
        probe.center = expected;
        let allowed = probe.within_bounds(&e.state.scene.config);
        if (allowed && after != expected) || (!allowed && after != before) {
            violations.push(format!("move {d:?}: {before:?} -> {after:?}"));
        }
    }

    for _ in 0..1000 {
        let w0 = rng.random_range(20..200);
        let h0 = ((w0 as f64) * rng.random_range(0.5..=2.0)).round() as i64;
        let mut scene = Scene::new(CanvasConfig { width: 1200, height: 1200, ..CanvasConfig::default() });
        scene.place_first(SceneObject::new(ObjectId(0), "o", Size2D::new(w0, h0))).unwrap();
        let grow = rng.random_bool(0.5);
        let dir = if grow { ResizeDirection::Increase } else { ResizeDirection::Decrease };
        let before = scene.get(ObjectId(0)).unwrap().size;
        match scene.resize_object(ObjectId(0), dir, RESIZE_STEP).unwrap() {
            ResizeOutcome::Resized(s) => {
                let w = before.width + if grow { 10 } else { -10 };
                let h = (w as f64 * h0 as f64 / w0 as f64).round();
                if s.width != w || (s.height as f64 - h).abs() > 1.0 {
                    violations.push(format!("resize {w0}x{h0}: got {}x{}", s.width, s.height));
                }
            }
            _ => {
                if scene.get(ObjectId(0)).unwrap().size != before {
                    violations.push("blocked resize changed size".into());
                }
            }
        }
    }
    ensure!(violations.is_empty(), "{} violations, first: {}", violations.len(), violations[0]);
    Ok("1000 moves, 1000 resizes, 0 violations".into())
}

fn overlap_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut mismatches = 0;
    let mut overlapping = 0;
    for _ in 0..1000 {
        let mut make = |id| {
            let mut o = SceneObject::new(ObjectId(id), "o", Size2D::new(rng.random_range(1..80), rng.random_range(1..80)));
            o.center = Point::new(rng.random_range(0..160), rng.random_range(0..160));
            o
        };
        let (a, b) = (make(0), make(1));
        let pix = |o: &SceneObject| {
            let x0 = o.center.x - o.size.width.div_euclid(2);
            let y0 = o.center.y - o.size.height.div_euclid(2);
            let (w, h) = (o.size.width, o.size.height);
            (x0..x0 + w).flat_map(move |x| (y0..y0 + h).map(move |y| (x, y))).collect::<Vec<_>>()
        };
        let set: std::collections::HashSet<(i64, i64)> = pix(&a).into_iter().collect();
        let truth = pix(&b).into_iter().any(|p| set.contains(&p));
        overlapping += truth as usize;
        if a.overlaps(&b) != truth || b.overlaps(&a) != truth {
            mismatches += 1;
        }
    }
    ensure!(mismatches == 0, "{mismatches} mismatches");
    Ok(format!("1000 pairs ({overlapping} overlapping), 0 mismatches"))
}

fn check_grid(grid: &TileGrid, scene: &Scene) -> Result<(), String> {
    let mut ids: Vec<ObjectId> = grid.occupied().map(|(_, id)| id).collect();
    ids.sort();
    let mut want: Vec<ObjectId> = scene.objects().iter().map(|o| o.id).collect();
    want.sort();
    ensure!(ids == want, "bijection broken: tiles {ids:?}, scene {want:?}");
    for (c, _) in grid.occupied() {
        for dr in -1..=1 {
            for dc in -1..=1 {
                let n = TileCoord::new(c.row + dr, c.col + dc);
                ensure!(grid.tile(n).is_some(), "{c} lacks neighbor {n}");
            }
        }
    }
    ensure!(grid.tile(grid.cursor()).is_some(), "cursor off grid");
    Ok(())
}

fn tile_fuzz() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut ops = 0;
    let mut pushes = (0, 0);
    while ops < 10_000 {
        let mut scene = Scene::new(CanvasConfig { width: 2000, height: 2000, ..CanvasConfig::default() });
        let mut grid = TileGrid::init();
        let mut next = 0;
        for _ in 0..200 {
            ops += 1;
            let occupied: Vec<TileCoord> = grid.occupied().map(|(c, _)| c).collect();
            match rng.random_range(0..10) {
                0..=2 => {
                    let empty: Vec<TileCoord> = grid.tiles().filter(|(_, t)| *t == Tile::Empty).map(|(c, _)| c).collect();
                    let coord = empty[rng.random_range(0..empty.len())];
                    let at = Point::new(rng.random_range(40..1960), rng.random_range(40..1960));
                    scene.place_at(SceneObject::new(ObjectId(next), "o", Size2D::square(40)), at).unwrap();
                    grid.occupy(coord, ObjectId(next)).map_err(|e| e.to_string())?;
                    next += 1;
                }
                3..=5 => {
                    grid.navigate(Direction::ALL[rng.random_range(0..4)]);
                }
                6 | 7 if !occupied.is_empty() => {
                    let coord = occupied[rng.random_range(0..occupied.len())];
                    let d = Direction::ALL[rng.random_range(0..4)];
                    let (g0, s0) = (grid.clone(), scene.clone());
                    match grid.push(&mut scene, coord, d) {
                        Ok(moved) => {
                            pushes.0 += 1;
                            let (dx, dy) = d.delta();
                            for o in s0.objects() {
                                let now = scene.get(o.id).unwrap();
                                let (want, tile) = if moved.contains(&o.id) {
                                    (Point::new(o.center.x + dx * PUSH_STEP, o.center.y + dy * PUSH_STEP), g0.coord_of(o.id).map(|c| c.step(d)))
                                } else {
                                    (o.center, g0.coord_of(o.id))
                                };
                                ensure!(now.center == want && grid.coord_of(o.id) == tile, "push moved {} wrongly", o.id);
                            }
                        }
                        Err(_) => {
                            pushes.1 += 1;
                            ensure!(grid == g0 && scene == s0, "rejected push changed state");
                        }
                    }
                }
                8 if !occupied.is_empty() => {
                    grid.delete_at(&mut scene, occupied[rng.random_range(0..occupied.len())])
                        .map_err(|e| e.to_string())?;
                }
                _ => grid = grid.relayout(&scene),
            }
            check_grid(&grid, &scene).map_err(|e| format!("after {ops} operations: {e}"))?;
        }
    }
    Ok(format!("{ops} operations ({} pushes, {} rejected atomically), 0 violations", pushes.0, pushes.1))
}

fn radar() -> Outcome {
    let mut scene = Scene::new(CanvasConfig::default());
    scene.place_first(SceneObject::new(ObjectId(0), "dog", Size2D::square(100))).unwrap();
    scene.place_at(SceneObject::new(ObjectId(1), "frisbee", Size2D::square(40)), Point::new(270, 250)).unwrap();
    let text = radar_scan(&scene, ObjectId(0)).map_err(|e| e.to_string())?;
    ensure!(text.contains("50 pixels up and 30 pixels left"), "got `{text}`");

    let mut rng = StdRng::seed_from_u64(13);
    for trial in 0..100 {
        let mut scene = Scene::new(CanvasConfig { width: 1000, height: 1000, ..CanvasConfig::default() });
        let n = rng.random_range(2..10);
        for i in 0..n {
            let at = Point::new(rng.random_range(10..990), rng.random_range(10..990));
            scene.place_at(SceneObject::new(ObjectId(i), format!("thing{i}"), Size2D::square(20)), at).unwrap();
        }
        let me = scene.objects()[rng.random_range(0..n as usize)].clone();
        let mut oracle: Vec<(f64, u32)> = scene
            .objects()
            .iter()
            .filter(|o| o.id != me.id)
            .map(|o| (((o.center.x - me.center.x) as f64).hypot((o.center.y - me.center.y) as f64), o.id.0))
            .collect();
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want: Vec<String> = oracle.iter().map(|(_, i)| format!("thing{i}")).collect();
        let text = radar_scan(&scene, me.id).map_err(|e| e.to_string())?;
        let got: Vec<String> = text.split("; ").map(|e| e.split(", ").next().unwrap().to_string()).collect();
        ensure!(got == want, "scene {trial}: {got:?} vs {want:?}");
    }
    Ok(format!("`{text}`; 100 random scenes ordered"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn replay_determinism() -> Outcome {
    let mut details = Vec::new();
    for task in ["task1", "task2"] {
        let mut files = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let out = dir.path().join("session.json");
            let args = ReplayArgs {
                script: fixture(&format!("{task}.script")),
                checks: Some(fixture(&format!("{task}.checks"))),
                allow_network: false,
                out: Some(out.clone()),
            };
            let result = cmd_replay(args, &mut std::io::sink()).map_err(|e| format!("{task}: {e}"))?;
            let checks = result.checks.unwrap();
            ensure!(checks.iter().all(|c| c.passed()), "{task}: checks failed");
            files.push((std::fs::read(&out).map_err(|e| e.to_string())?, checks.len()));
        }
        ensure!(files[0].0 == files[1].0, "{task}: session files differ between runs");
        details.push(format!("{task} {} checks, sha {}", files[0].1, &sha256_hex(&files[0].0)[..12]));
    }
    Ok(details.join("; "))
}

fn template_fidelity() -> Outcome {
    let frozen = [
        ("tactile", templates::TACTILE_GENERATION, "12c412c596c0e9a8d5277251f0f39598934ce6843a364534ae2fdc9a06d8cf4e", "Create ONLY ONE DIGITAL graphic"),
        ("global", templates::GLOBAL_DESCRIPTION, "f09e595e516a0cfd3c5e49ff44a994e4e5f603e542519d71327bda6fad278e39", "one-line brief description"),
        ("local", templates::LOCAL_DESCRIPTION, "2efbe5c6c68949ed392c90e18812dba663ef4030c6deecc34a05b75c2ad0c5ff", "It is located at x-coordinate"),
        ("chat", templates::CHAT, "5a523ab3fdc7b447d86b9065a8b7c1e072a296e603f91534708e9c97614a1312", "describing an image to a Visually Impaired Person"),
    ];
    for (name, text, sha, phrase) in frozen {
        ensure!(sha256_hex(text.as_bytes()) == sha, "{name} template bytes changed");
        ensure!(text.contains(phrase), "{name} template lacks `{phrase}`");
    }
    Ok("4 templates byte-identical".into())
}

fn step_image() -> RasterImage {
    let mut img = RasterImage::filled(16, 16, [0, 0, 0, 255]);
    for y in 0..16 {
        for x in 8..16 {
            img.set_pixel(x, y, [255, 255, 255, 255]);
        }
    }
    img
}

fn edge_columns(edges: &altcanvas_core::render::GrayImage) -> Vec<u32> {
    (0..edges.width).filter(|&x| (0..edges.height).any(|y| edges.get(x, y) != 0)).collect()
}

fn sobel_correctness() -> Outcome {
    let img = step_image();
    let values: Vec<i32> = (0..16 * 16).map(|i| img.pixel(i % 16, i / 16)[0] as i32).collect();
    let (gx, _) = sobel_gradients(&values, 16, 16);
    ensure!(gx[8 * 16 + 8].abs() == 1020, "raw |Gx| at the boundary is {}", gx[8 * 16 + 8].abs());
    let params = EdgeParams { algorithm: EdgeAlgorithm::Sobel, ..EdgeParams::default() };
    let mut surviving = Vec::new();
    for threshold in 1..=255u8 {
        let cols = edge_columns(&sobel_edges(&img, &EdgeParams { threshold, ..params }));
        if cols.len() == 1 {
            surviving.push(threshold);
        }
    }
    ensure!(
        !surviving.is_empty(),
        "|Gx| = 1020 at the boundary, but columns 7 and 8 both reach 1020, so every threshold keeps {:?}",
        edge_columns(&sobel_edges(&img, &params))
    );
    Ok(format!("|Gx| = 1020, one column at thresholds {surviving:?}"))
}

/// Edge mask from OpenCV 4 `Canny(step, 200, 400, L2gradient=true)` on the
/// 16 by 16 step (raw thresholds are 4 times the normalized 50 and 100):
/// column 7 set in all 16 rows, nothing else.
const CANNY_REFERENCE_COLUMN: u32 = 7;

fn canny_correctness() -> Outcome {
    let edges = canny_edges(&step_image(), &EdgeParams::default()).map_err(|e| e.to_string())?;
    for y in 0..16 {
        for x in 0..16 {
            let want = x == CANNY_REFERENCE_COLUMN;
            ensure!((edges.get(x, y) != 0) == want, "pixel ({x},{y}) differs from the reference");
        }
    }
    Ok(format!("single column x = {CANNY_REFERENCE_COLUMN}, matches reference"))
}

fn sonification() -> Outcome {
    let p = SonificationParams::default();
    let f = |s| size_to_frequency(&Size2D::square(s), &p);
    for s in 10..600 {
        ensure!(f(s + 1) > f(s), "f({}) <= f({s})", s + 1);
    }
    ensure!(f(100) == 440.0, "f(100x100) = {}", f(100));
    ensure!(f(300) == 880.0, "f(300x300) = {}", f(300));
    Ok("strictly increasing; 440.0 Hz, 880.0 Hz".into())
}

fn fuzz_session(rng: &mut StdRng, seed: u64) -> SessionState {
    let style = if rng.random_bool(0.5) { ImageStyle::Color } else { ImageStyle::Tactile };
    let mut e = editor(CanvasConfig { image_style: style, ..CanvasConfig::default() }, seed);
    let names = ["dog", "bowl", "clock", "potted plant", "window"];
    for _ in 0..rng.random_range(5..40) {
        let d = Direction::ALL[rng.random_range(0..4)];
        let cmd = match rng.random_range(0..14) {
            0 => {
                e.submit(Command::Escape);
                generate(&mut e, names[rng.random_range(0..names.len())]);
                continue;
            }
            1..=3 => Command::Arrow { direction: d },
            4 => Command::ShiftArrow { direction: d },
            5 => Command::ShiftL,
            6 => Command::ShiftS,
            7 => Command::Escape,
            8 => Command::ShiftR,
            9 => Command::ShiftI,
            10 => Command::ShiftK,
            11 => Command::ShiftX,
            12 => Command::ShiftG,
            _ => Command::Shift,
        };
        e.submit(cmd);
    }
    e.into_state()
}

fn persistence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(17);
    for i in 0..100 {
        let state = fuzz_session(&mut rng, i);
        let bytes = persist::to_bytes(&state);
        let loaded = persist::from_bytes(&bytes).map_err(|e| format!("session {i}: {e}"))?;
        ensure!(persist::to_bytes(&loaded) == bytes, "session {i}: save/load/save bytes differ");
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let sessions = runtime.block_on(restart_digests())?;
    Ok(format!("100 sessions byte-identical; {sessions} sessions survive a restart"))
}

fn service_config(dir: Option<PathBuf>) -> ServiceConfig {
    ServiceConfig {
        data_dir: dir,
        bind: "127.0.0.1:0".parse().unwrap(),
        remote: None,
        heartbeat: Duration::from_secs(15),
    }
}

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn settled(app: &axum::Router, id: &str) -> Result<Value, String> {
    for _ in 0..1000 {
        let (_, v) = call(app, Method::GET, &format!("/sessions/{id}"), None).await;
        if v["session"]["mode"]["mode"] != "await_backend" {
            return Ok(v);
        }
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    Err(format!("session {id} stuck waiting for the backend"))
}

async fn populated(app: &axum::Router, seed: u64, names: &[&str]) -> Result<String, String> {
    let (status, v) = call(app, Method::POST, "/sessions", Some(json!({ "seed": seed }))).await;
    ensure!(status == StatusCode::CREATED, "create returned {status}");
    let id = v["session_id"].as_str().unwrap().to_string();
    for (i, name) in names.iter().enumerate() {
        let mut cmds = vec![];
        if i > 0 {
            cmds.push(json!({ "command": "arrow", "direction": "left" }));
        }
        cmds.extend([
            json!({ "command": "enter" }),
            json!({ "command": "transcript_arrived", "text": name }),
            json!({ "command": "enter" }),
        ]);
        call(app, Method::POST, &format!("/sessions/{id}/commands"), Some(json!({ "commands": cmds }))).await;
        settled(app, &id).await?;
    }
    Ok(id)
}

async fn restart_digests() -> Result<usize, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = service_config(Some(dir.path().to_path_buf()));
    let app = router(AppState::open(&config).map_err(|e| e.to_string())?);
    let mut before = Vec::new();
    for seed in 0..5u64 {
        let id = populated(&app, seed, &["dog", "bowl"][..(seed as usize % 3).min(2)]).await?;
        let cmds = json!({ "commands": [{ "command": "shift_l" }, { "command": "arrow", "direction": "up" }] });
        call(&app, Method::POST, &format!("/sessions/{id}/commands"), Some(cmds)).await;
        let v = settled(&app, &id).await?;
        before.push((id, v["state_digest"].clone()));
    }
    drop(app);
    let app = router(AppState::open(&config).map_err(|e| e.to_string())?);
    for (id, digest) in &before {
        let (status, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
        ensure!(status == StatusCode::OK, "session {id} missing after restart");
        ensure!(&v["state_digest"] == digest, "session {id} digest changed across restart");
    }
    Ok(before.len())
}

fn random_command(rng: &mut StdRng) -> Command {
    let d = Direction::ALL[rng.random_range(0..4)];
    match rng.random_range(0..12) {
        0..=3 => Command::Arrow { direction: d },
        4 => Command::ShiftArrow { direction: d },
        5 => Command::ShiftL,
        6 => Command::ShiftS,
        7 => Command::Shift,
        8 => Command::ShiftI,
        9 => Command::ShiftR,
        10 => Command::ShiftK,
        _ => Command::Escape,
    }
}

async fn hammer_trials() -> Result<String, String> {
    let app = router(AppState::open(&service_config(None)).map_err(|e| e.to_string())?);
    let mut divergences = 0;
    let mut commands = 0;
    for trial in 0..50u64 {
        let mut rng = StdRng::seed_from_u64(1000 + trial);
        let id = populated(&app, trial, &["dog", "bowl"]).await?;
        let v = settled(&app, &id).await?;
        let mut serial = persist::from_bytes(&serde_json::to_vec(&v["session"]).unwrap()).map_err(|e| e.to_string())?;
        ensure!(serial.mode == Mode::Navigate, "trial {trial}: setup did not settle");
        let batches: Vec<Vec<Command>> = (0..24)
            .map(|_| (0..rng.random_range(1..4)).map(|_| random_command(&mut rng)).collect())
            .collect();
        let clients: Vec<_> = (0..2)
            .map(|parity| {
                let app = app.clone();
                let uri = format!("/sessions/{id}/commands");
                let mine: Vec<(usize, Vec<Command>)> =
                    batches.iter().cloned().enumerate().filter(|(i, _)| i % 2 == parity).collect();
                tokio::spawn(async move {
                    for (seq, batch) in mine {
                        let body = json!({ "client_seq": seq, "commands": batch });
                        let (status, _) = call(&app, Method::POST, &uri, Some(body)).await;
                        assert!(status.is_success(), "batch {seq} returned {status}");
                        tokio::task::yield_now().await;
                    }
                })
            })
            .collect();
        for c in clients {
            c.await.map_err(|e| format!("trial {trial}: client failed: {e}"))?;
        }
        for cmd in batches.into_iter().flatten() {
            commands += 1;
            serial.apply(cmd);
        }
        let (_, served) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
        if served["state_digest"] != persist::digest(&serial) {
            divergences += 1;
        }
    }
    ensure!(divergences == 0, "{divergences} divergences in 50 trials");
    Ok(format!("50 trials, {commands} commands, 0 divergences"))
}

fn hammer() -> Outcome {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(4)
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?;
    runtime.block_on(hammer_trials())
}
