"""Configuration parsing and the command-line front end."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image

from cornersal.cli import main
from cornersal.config import (
    ConfigError,
    PipelineConfig,
    apply_overrides,
    load_config,
    parse_config,
    serialize_config,
)
from cornersal.pixel_core import write_image

FAST = ["--scales", "100,150"]  # two layers keep CLI runs quick


def test_defaults():
    config = PipelineConfig()
    assert config.sigma1 == 0.1
    assert config.sigma2 == 0.25
    assert config.eta == 6.0
    assert config.scales == (100, 150, 200, 250, 300)
    assert config.corner_fraction == 0.15
    assert config.h_count == 200
    assert config.beta == 1.0
    assert config.guided_radius == 0
    assert config.guided_eps == 1e-3
    assert config.f_mode == "const"
    assert config.squared_distance is False
    assert config.literal_log_sign is False
    assert config.beta2 == 0.3
    assert config.seed == 0


def test_serialize_round_trip():
    config = PipelineConfig(eta=3.5, scales=(80, 120), squared_distance=True, f_mode="luma")
    text = serialize_config(config)
    assert "eta=3.5" in text
    assert "scales=80,120" in text
    assert "squared_distance=true" in text
    assert text.endswith("\n")
    assert parse_config(text) == config


def test_parse_config_accepts_comments_and_blanks():
    config = parse_config("# comment\n\n eta = 2.0 \nscales=100,200\n")
    assert config.eta == 2.0
    assert config.scales == (100, 200)


def test_parse_config_error_reporting():
    with pytest.raises(ConfigError, match="line 2.*unknown key"):
        parse_config("eta=2.0\nnope=1\n")
    with pytest.raises(ConfigError, match="line 3.*duplicate"):
        parse_config("eta=2.0\n# pad\neta=3.0\n")
    with pytest.raises(ConfigError, match="line 1.*bad value"):
        parse_config("h_count=many\n")
    with pytest.raises(ConfigError, match="line 1.*expected key=value"):
        parse_config("just words\n")


def test_validation_rules():
    with pytest.raises(ConfigError):
        parse_config("sigma1=0\n")
    with pytest.raises(ConfigError):
        parse_config("eta=-1\n")
    with pytest.raises(ConfigError):
        parse_config("scales=200,100\n")
    with pytest.raises(ConfigError):
        parse_config("corner_fraction=0.5\n")
    with pytest.raises(ConfigError):
        parse_config("h_count=0\n")
    with pytest.raises(ConfigError):
        parse_config("f_mode=fancy\n")
    with pytest.raises(ConfigError):
        parse_config("squared_distance=yes\n")


def test_apply_overrides():
    config = apply_overrides(PipelineConfig(), {"eta": "3.0", "scales": "90,140"})
    assert config.eta == 3.0
    assert config.scales == (90, 140)
    assert config.sigma1 == 0.1  # untouched fields keep their values
    with pytest.raises(ConfigError, match="unknown key"):
        apply_overrides(PipelineConfig(), {"nope": "1"})
    with pytest.raises(ConfigError, match="bad value"):
        apply_overrides(PipelineConfig(), {"eta": "six"})
    with pytest.raises(ConfigError):  # overrides hit the same validation
        apply_overrides(PipelineConfig(), {"eta": "-2"})


def scene_image():
    img = np.full((120, 120, 3), (30, 60, 180), dtype=np.uint8)
    img[40:80, 40:80] = (200, 40, 40)
    return img


@pytest.fixture()
def image_dir(tmp_path):
    source = tmp_path / "input"
    source.mkdir()
    write_image(source / "scene.png", scene_image())
    return source


def test_detect_writes_valid_png(tmp_path, image_dir):
    out = tmp_path / "out"
    code = main(["detect", str(image_dir / "scene.png"), "-o", str(out), *FAST])
    assert code == 0
    produced = out / "scene_mlp.png"
    with Image.open(produced) as im:
        im.verify()
    with Image.open(produced) as im:
        assert im.size == (120, 120)
        assert im.mode == "L"


def test_detect_missing_input_is_usage_error(tmp_path):
    assert main(["detect", str(tmp_path / "nope.png"), "-o", str(tmp_path / "out")]) == 2


def test_detect_empty_directory_is_usage_error(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["detect", str(empty), "-o", str(tmp_path / "out")]) == 2


def test_detect_bad_image_fails_per_file(tmp_path, capsys):
    bad = tmp_path / "input"
    bad.mkdir()
    (bad / "broken.png").write_bytes(b"junk")
    assert main(["detect", str(bad), "-o", str(tmp_path / "out")]) == 1
    assert "broken.png" in capsys.readouterr().err


def test_detect_single_scale_matches_dumped_intermediate(tmp_path, image_dir):
    single = tmp_path / "single"
    full = tmp_path / "full"
    assert main(["detect", str(image_dir), "-o", str(single), "--single-scale", "150", *FAST]) == 0
    assert main(["detect", str(image_dir), "-o", str(full), "--dump-intermediates", *FAST]) == 0
    single_bytes = (single / "scene_slp_150.png").read_bytes()
    assert single_bytes == (full / "scene_slp_150.png").read_bytes()
    for name in ("scene_cbp_100.png", "scene_ofp_100.png", "scene_windows_100.txt"):
        assert (full / name).is_file()
    assert not (single / "scene_mlp.png").exists()


def test_detect_flag_overrides_config_file(tmp_path, image_dir):
    config_path = tmp_path / "pipeline.cfg"
    config_path.write_text("scales=100,150\nh_count=50\n")
    out = tmp_path / "out"
    code = main(
        ["detect", str(image_dir), "-o", str(out), "--config", str(config_path), "--h-count", "60"]
    )
    assert code == 0
    # an invalid override proves the flag value reaches validation
    assert main(["detect", str(image_dir), "-o", str(out), "--sigma1", "-1"]) == 2


def test_detect_rejects_bad_config_file(tmp_path, image_dir):
    config_path = tmp_path / "pipeline.cfg"
    config_path.write_text("mystery=1\n")
    out = tmp_path / "out"
    assert main(["detect", str(image_dir), "-o", str(out), "--config", str(config_path)]) == 2


def test_synth_writes_corpus(tmp_path):
    out = tmp_path / "corpus"
    assert main(["synth", str(out), "--seed", "3", "--count", "2"]) == 0
    assert sorted(p.name for p in (out / "images").iterdir()) == [
        "synth_000.png",
        "synth_001.png",
    ]
    assert sorted(p.name for p in (out / "masks").iterdir()) == [
        "synth_000.png",
        "synth_001.png",
    ]


def test_synth_validation():
    assert main(["synth", "ignored", "--count", "0"]) == 2
    assert main(["synth", "ignored", "--seed", "-1", "--count", "1"]) == 2


def test_eval_produces_report_and_figures(tmp_path, capsys):
    dataset = tmp_path / "dataset"
    assert main(["synth", str(dataset), "--seed", "11", "--count", "2"]) == 0
    report = tmp_path / "results" / "report.csv"
    code = main(["eval", str(dataset), "-o", str(report), *FAST])
    assert code == 0
    out = capsys.readouterr().out
    assert "multilayer adaptive F:" in out
    assert "mean-fusion adaptive F:" in out
    assert len(report.read_text().splitlines()) == 257
    assert (report.parent / "report_meanfusion.csv").is_file()
    for figure in ("report_pr.png", "report_fmeasure.png"):
        with Image.open(report.parent / figure) as im:
            im.verify()


def test_eval_missing_dataset_is_usage_error(tmp_path):
    assert main(["eval", str(tmp_path / "nope"), "-o", str(tmp_path / "r.csv")]) == 2


def test_eval_empty_dataset_is_usage_error(tmp_path):
    dataset = tmp_path / "dataset"
    (dataset / "images").mkdir(parents=True)
    assert main(["eval", str(dataset), "-o", str(tmp_path / "r.csv")]) == 2


def test_cli_rejects_bad_jobs(tmp_path, image_dir):
    assert main(["detect", str(image_dir), "-o", str(tmp_path / "out"), "--jobs", "0"]) == 2


def test_load_config_from_file(tmp_path):
    path = tmp_path / "pipeline.cfg"
    path.write_text(serialize_config(PipelineConfig(eta=4.0)))
    assert load_config(path) == PipelineConfig(eta=4.0)
