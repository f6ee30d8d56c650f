"""
命令行端到端测试
"""
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from src.common.constants import ExitCode
from src.main import cli
from src.snn.schemas import NetworkArchitecture


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    return tmp_path / "out"


@pytest.fixture
def invoke(runner, out_dir, network_file, tiny_mnist):
    """以临时输出目录调用根命令；{network} 与 {mnist} 占位符替换为测试文件"""

    def _invoke(*args: str, out: Path | None = None):
        argv = [
            str(a).format(network=network_file, mnist=tiny_mnist)
            for a in args
        ]
        return runner.invoke(cli, ["--out-dir", str(out or out_dir), *argv])

    return _invoke


def read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def error_code(result) -> int:
    return read_json_text(result.stderr)["code"]


def read_json_text(text: str) -> dict:
    line = [line for line in text.splitlines() if line.startswith("{")][-1]
    return json.loads(line)


# ========== simulate / verify ==========

def test_simulate_then_verify(invoke, out_dir):
    """测试导出轨迹并复核通过"""
    result = invoke("simulate", "--network", "{network}", "--index", "0", "--mnist-dir", "{mnist}")
    assert result.exit_code == 0, result.output
    trace = read_json(out_dir / "trace_0.json")
    assert trace["t_end"] == 1
    assert trace["steps"][1]["input"] == "1101"

    manifest = read_json(out_dir / "trace_0.manifest.json")
    assert manifest["command"] == "simulate"
    assert manifest["seeds"] == {"seed": 0}

    result = invoke("verify", "--network", "{network}", "--dir", str(out_dir))
    assert result.exit_code == 0, result.output
    report = read_json(out_dir / "verify_report.json")
    assert (report["total"], report["passed"]) == (1, 1)


def test_verify_corrupted_trace(invoke, out_dir):
    """测试篡改输出位后复核失败，退出码为 5"""
    invoke("simulate", "--network", "{network}", "--index", "0", "--mnist-dir", "{mnist}")
    path = out_dir / "trace_0.json"
    trace = read_json(path)
    bits = trace["steps"][1]["output"]
    trace["steps"][1]["output"] = ("0" if bits[0] == "1" else "1") + bits[1:]
    path.write_text(json.dumps(trace), encoding="utf-8")

    result = invoke("verify", "--network", "{network}", "--dir", str(out_dir))
    assert result.exit_code == ExitCode.CERTIFICATE_FAILURE
    assert error_code(result) == ExitCode.CERTIFICATE_FAILURE
    report = read_json(out_dir / "verify_report.json")
    assert report["items"][0]["failures"] == ["o0@1"]


def test_verify_doctored_potential(invoke, out_dir):
    """测试只改写膜电位（发放位不变）的轨迹同样复核失败"""
    invoke("simulate", "--network", "{network}", "--index", "0", "--mnist-dir", "{mnist}")
    path = out_dir / "trace_0.json"
    trace = read_json(path)
    trace["steps"][1]["hidden_potential"][0] += 1
    path.write_text(json.dumps(trace), encoding="utf-8")

    result = invoke("verify", "--network", "{network}", "--dir", str(out_dir))
    assert result.exit_code == ExitCode.CERTIFICATE_FAILURE
    report = read_json(out_dir / "verify_report.json")
    assert report["items"][0]["failures"] == ["h0@1"]


def test_verify_empty_directory(invoke, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    result = invoke("verify", "--network", "{network}", "--dir", str(empty))
    assert result.exit_code == 0, result.output


def test_missing_network_is_data_error(invoke, tmp_path):
    result = invoke("simulate", "--network", str(tmp_path / "nope.json"), "--index", "0", "--mnist-dir", "{mnist}")
    assert result.exit_code == ExitCode.DATA_ERROR


# ========== explain / bench ==========

@pytest.mark.parametrize("backend", ["cnf", "smt"])
def test_explain_writes_artifacts(invoke, out_dir, backend):
    """测试解释命令写出 JSON、图像与清单，之后可被 verify 复核"""
    result = invoke(
        "explain", "--network", "{network}", "--index", "0", "--t", "1",
        "--backend", backend, "--mnist-dir", "{mnist}",
    )
    assert result.exit_code == 0, result.output

    export = read_json(out_dir / "explanation_0_t1.json")
    assert sorted((item["index"], item["polarity"]) for item in export["literals"]) == [
        (0, True), (1, True), (2, False),
    ]
    assert export["certificates"] == {"i": True, "ii": True, "iii": True}
    assert (out_dir / "explanation_0_t1.ppm").read_bytes().startswith(b"P6\n2 2\n255\n")
    assert (out_dir / "explanation_0_t1.manifest.json").is_file()

    result = invoke("verify", "--network", "{network}", "--dir", str(out_dir))
    assert result.exit_code == 0, result.output


def test_explain_batch(invoke, out_dir):
    result = invoke(
        "explain", "--network", "{network}", "--indices", "0..2", "--t", "1",
        "--mnist-dir", "{mnist}", "--workers", "1",
    )
    assert result.exit_code == 0, result.output
    assert sorted(p.name for p in out_dir.glob("explanation_*_t1.json")) == [
        "explanation_0_t1.json", "explanation_1_t1.json", "explanation_2_t1.json",
    ]


def test_explain_tampered_explanation_fails_verify(invoke, out_dir):
    """测试在解释中加入多余文字后复核报告极小性失败"""
    invoke("explain", "--network", "{network}", "--index", "0", "--t", "1", "--mnist-dir", "{mnist}")
    path = out_dir / "explanation_0_t1.json"
    export = read_json(path)
    export["literals"].append({"x": 1, "y": 1, "time": 1, "polarity": True, "index": 3})
    path.write_text(json.dumps(export), encoding="utf-8")

    result = invoke("verify", "--network", "{network}", "--dir", str(out_dir))
    assert result.exit_code == ExitCode.CERTIFICATE_FAILURE
    item = read_json(out_dir / "verify_report.json")["items"][0]
    assert "iii" in item["failures"]
    assert "无连接特征 3" in item["failures"]


@pytest.mark.parametrize(
    "args",
    [
        ["--t", "1"],
        ["--t", "1", "--index", "0", "--indices", "0..1"],
        ["--t", "1", "--indices", "3..1"],
    ],
)
def test_explain_config_errors(invoke, args):
    result = invoke("explain", "--network", "{network}", "--mnist-dir", "{mnist}", *args)
    assert result.exit_code == ExitCode.CONFIG_ERROR


def test_explain_time_out_of_range(invoke):
    result = invoke("explain", "--network", "{network}", "--index", "0", "--t", "5", "--mnist-dir", "{mnist}")
    assert result.exit_code == ExitCode.DATA_ERROR


def test_bench(invoke, out_dir):
    """测试两个后端在同一顺序下给出相同的解释"""
    result = invoke("bench", "--network", "{network}", "--indices", "0..3", "--t", "1", "--mnist-dir", "{mnist}", "--workers", "1")
    assert result.exit_code == 0, result.output
    summary = read_json(out_dir / "bench_summary.json")
    assert summary["agreement"] == 1.0
    assert [s["backend"] for s in summary["summaries"]] == ["cnf", "smt"]
    assert [s["certificates_passed"] for s in summary["summaries"]] == [4, 4]


# ========== train ==========

@pytest.mark.parametrize(
    "args",
    [
        ["--digits", "1,7", "--k", "4", "--t-end", "3"],
        ["--digits", "1,1", "--k", "4"],
        ["--digits", "1,x", "--k", "4"],
        ["--digits", "1,7", "--k", "0"],
    ],
)
def test_train_rejects_invalid_flags(invoke, args):
    """测试非法训练参数在读取数据前被拒绝"""
    result = invoke("train", *args, "--mnist-dir", "{mnist}")
    assert result.exit_code == ExitCode.CONFIG_ERROR
    assert error_code(result) == ExitCode.CONFIG_ERROR


def test_train_then_explain(invoke, out_dir):
    """测试训练导出的网络可以直接用于解释"""
    result = invoke(
        "train", "--digits", "1,7", "--k", "4", "--epochs", "2", "--batch-size", "2",
        "--mnist-dir", "{mnist}", "--name", "tiny",
    )
    assert result.exit_code == 0, result.output
    arch = NetworkArchitecture.read_json(out_dir / "tiny.json")
    assert arch.class_labels == [1, 7]
    assert arch.input_shape == (2, 2)
    metrics = read_json(out_dir / "tiny.metrics.json")
    assert len(metrics["history"]) == 2
    assert 0.0 <= metrics["test_accuracy"] <= 1.0

    result = invoke(
        "explain", "--network", str(out_dir / "tiny.json"), "--index", "0", "--t", "1",
        "--mnist-dir", "{mnist}",
    )
    assert result.exit_code in (ExitCode.OK, ExitCode.CERTIFICATE_FAILURE), result.output
    assert (out_dir / "explanation_0_t1.json").is_file()


# ========== shap / render ==========

def test_shap_exact_and_render(invoke, out_dir):
    """测试精确归因报告与重复渲染的逐字节一致性"""
    result = invoke("shap", "--network", "{network}", "--index", "0", "--exact", "--mnist-dir", "{mnist}")
    assert result.exit_code == 0, result.output
    report = read_json(out_dir / "shap_0.json")
    assert report["scores"] == pytest.approx([0.5, 0.5, 0.0, 0.0])
    assert report["relevant"] == [0, 1]
    assert report["zero_connection_relevant"] == []

    rendered = out_dir / "render"
    images = []
    for _ in range(2):
        result = invoke("render", "--artifact", str(out_dir / "shap_0.json"), "--network", "{network}", out=rendered)
        assert result.exit_code == 0, result.output
        images.append((rendered / "shap_0.ppm").read_bytes())
    assert images[0] == images[1] == (out_dir / "shap_0.ppm").read_bytes()


def test_shap_sample_size_too_small(invoke):
    result = invoke("shap", "--network", "{network}", "--index", "0", "--sample-size", "2", "--mnist-dir", "{mnist}")
    assert result.exit_code == ExitCode.CONFIG_ERROR


def test_render_unknown_artifact(invoke, tmp_path):
    artifact = tmp_path / "other.json"
    artifact.write_text('{"foo": 1}', encoding="utf-8")
    result = invoke("render", "--artifact", str(artifact), "--network", "{network}")
    assert result.exit_code == ExitCode.DATA_ERROR


def test_render_raw_image(invoke, out_dir):
    result = invoke("render", "--index", "0", "--mnist-dir", "{mnist}")
    assert result.exit_code == 0, result.output
    data = (out_dir / "image_0.pgm").read_bytes()
    assert data == b"P5\n2 2\n255\n" + bytes([255, 230, 0, 200])


# ========== replay ==========

def test_replay_reproduces_outputs(invoke, out_dir, tmp_path):
    """测试按清单重放得到逐字节相同的产物"""
    result = invoke("simulate", "--network", "{network}", "--index", "0", "--mnist-dir", "{mnist}")
    assert result.exit_code == 0, result.output

    again = tmp_path / "again"
    result = invoke("replay", str(out_dir / "trace_0.manifest.json"), "--out-dir", str(again))
    assert result.exit_code == 0, result.output
    assert (again / "trace_0.json").read_bytes() == (out_dir / "trace_0.json").read_bytes()


def test_replay_missing_manifest(invoke, tmp_path):
    result = invoke("replay", str(tmp_path / "missing.manifest.json"))
    assert result.exit_code == ExitCode.DATA_ERROR


# ========== MNIST 验收 ==========

@pytest.fixture(scope="module")
def mnist_network(tmp_path_factory, mnist_available) -> Path:
    """数字 1、5、9 上训练的 k = 16 二值阈值编码网络"""
    out = tmp_path_factory.mktemp("mnist")
    result = CliRunner().invoke(
        cli,
        [
            "--out-dir", str(out), "train", "--digits", "1,5,9", "--k", "16", "--scale", "binary",
            "--encoding", "thresholded", "--epochs", "5", "--mnist-dir", str(mnist_available),
        ],
    )
    assert result.exit_code == 0, result.output
    return out


@pytest.mark.slow
def test_mnist_accuracy(mnist_network):
    """测试训练得到的网络在测试集上的准确率不低于 0.85"""
    metrics = read_json(mnist_network / "network.metrics.json")
    assert metrics["test_accuracy"] >= 0.85


@pytest.mark.slow
def test_mnist_explanations(runner, mnist_network, mnist_available):
    """测试 100 个实例的解释全部通过证书且不含无连接特征，前 20 个的平均长度落在 [107, 428]"""
    out = mnist_network / "explain"
    result = runner.invoke(
        cli,
        [
            "--out-dir", str(out), "explain", "--network", str(mnist_network / "network.json"),
            "--indices", "0..99", "--t", "1", "--mnist-dir", str(mnist_available),
        ],
    )
    assert result.exit_code == ExitCode.OK, result.output

    exports = [read_json(out / f"explanation_{index}_t1.json") for index in range(100)]
    assert all(export["certificates"]["ii"] and export["certificates"]["iii"] for export in exports)
    lengths = [len(export["literals"]) for export in exports[:20]]
    assert 107 <= sum(lengths) / len(lengths) <= 428
