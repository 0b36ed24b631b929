import json

from click.testing import CliRunner

from blurforge.cli import main

from conftest import make_natural_image, make_person_labels, write_batch_inputs


def invoke(*args):
    return CliRunner().invoke(main, list(args))


def write_config(tmp_path, text=""):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return path


def test_validate_config_ok(tmp_path):
    cfg = write_config(tmp_path)
    result = invoke("validate-config", str(cfg))
    assert result.exit_code == 0
    assert "config ok" in result.output


def test_validate_config_error_exit_code(tmp_path):
    cfg = write_config(tmp_path, "[branch_probs]\nnone = 0.9\nhmb = 0.0\ngeneric = 0.0\n")
    result = invoke("validate-config", str(cfg))
    assert result.exit_code == 2
    assert "branch_probs" in result.output


def test_validate_config_warning_still_ok(tmp_path):
    cfg = write_config(tmp_path, "mystery = 1\n")
    result = invoke("validate-config", str(cfg))
    assert result.exit_code == 0
    assert "warning" in result.output


def test_generate_runs_batch(tmp_path):
    inputs = write_batch_inputs(tmp_path, 3)
    cfg = write_config(tmp_path, "root_seed = 4\noutput_size = 96\n")
    out = tmp_path / "out"
    result = invoke("generate", "--config", str(cfg), "--input", str(inputs),
                    "--out", str(out))
    assert result.exit_code == 0, result.output
    summary = json.loads(result.output)
    assert summary["total"] == 3 and summary["succeeded"] == 3
    assert (out / "manifest.jsonl").exists()


def test_generate_partial_failure_exit_code(tmp_path):
    inputs = write_batch_inputs(tmp_path, 2)
    lines = inputs.read_text().splitlines()
    broken = json.loads(lines[0])
    broken["hq_path"] = str(tmp_path / "gone.png")
    lines[0] = json.dumps(broken)
    inputs.write_text("\n".join(lines) + "\n")
    cfg = write_config(tmp_path, "output_size = 96\n")
    result = invoke("generate", "--config", str(cfg), "--input", str(inputs),
                    "--out", str(tmp_path / "out"))
    assert result.exit_code == 1


def test_generate_bad_config_exit_code(tmp_path):
    inputs = write_batch_inputs(tmp_path, 1)
    cfg = write_config(tmp_path, "output_size = 2\n")
    result = invoke("generate", "--config", str(cfg), "--input", str(inputs),
                    "--out", str(tmp_path / "out"))
    assert result.exit_code == 2


def test_preview_dumps_intermediates(tmp_path):
    from blurforge import image_io

    hq_path = tmp_path / "hq.png"
    labels_path = tmp_path / "labels.png"
    image_io.save_image(make_natural_image(), hq_path)
    image_io.save_label_raster(make_person_labels(), labels_path)
    cfg = write_config(tmp_path, "output_size = 96\n")
    out = tmp_path / "preview"
    result = invoke("preview", "--config", str(cfg), "--hq", str(hq_path),
                    "--labels", str(labels_path), "--seed", "8",
                    "--branch", "hmb", "--out", str(out))
    assert result.exit_code == 0, result.output
    for name in ("lq.png", "mask.png", "psf.png", "weight_map.png",
                 "blurred.png", "hmb.png", "record.json"):
        assert (out / name).exists(), name
    record = json.loads((out / "record.json").read_text())
    assert record["first_order_branch"] == "hmb"
    assert record["root_seed"] == 8


def test_stats_command(tmp_path):
    inputs = write_batch_inputs(tmp_path, 3)
    cfg = write_config(tmp_path, "root_seed = 5\noutput_size = 96\n")
    out = tmp_path / "out"
    assert invoke("generate", "--config", str(cfg), "--input", str(inputs),
                  "--out", str(out)).exit_code == 0
    result = invoke("stats", "--manifest", str(out / "manifest.jsonl"))
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["total"] == 3


def test_hmbr_command(tmp_path):
    orig = tmp_path / "orig.jsonl"
    rest = tmp_path / "rest.jsonl"
    orig.write_text('{"image": "a", "count": 1765}\n')
    rest.write_text('{"image": "a", "count": 164}\n')
    result = invoke("hmbr", "--original", str(orig), "--restored", str(rest))
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert abs(report["ratio"] - 0.0929) < 1e-4
