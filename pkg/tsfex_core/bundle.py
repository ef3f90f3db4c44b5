"""
模型包持久化
单个 .npz 文件：数值数组以小端类型存储，其余状态为 JSON 清单（uint8 数组 `__manifest__`）
"""

import io
import json
import logging
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tsfex_core.exceptions import BundleFormatError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST_KEY = "__manifest__"
_ARRAY_REF = "__array__"
# 固定的 zip 条目时间戳，保证同一模型包的字节一致
_ZIP_DATE_TIME = (1980, 1, 1, 0, 0, 0)


@dataclass
class RouteBundle:
    """单条路由（fine / coarse / all）的特征流程与学习器"""

    grains: list[str]
    schema: list[str]
    fitted_columns: list[str]
    blocks: list[dict]
    learner: str
    learner_state: dict
    classes: list[float]


@dataclass
class ModelBundle:
    routes: dict[str, RouteBundle] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION


def _to_little_endian(arr: np.ndarray) -> np.ndarray:
    if arr.dtype.kind == "f":
        return arr.astype("<f8")
    if arr.dtype.kind in "iu":
        return arr.astype("<i8")
    if arr.dtype.kind == "b":
        return arr.astype("<i8")
    raise BundleFormatError(f"不支持的数组类型: {arr.dtype}")


def _flatten(obj, arrays: dict[str, np.ndarray]):
    """把嵌套结构中的数组替换为引用，收集到 arrays"""
    if isinstance(obj, np.ndarray):
        key = f"a{len(arrays)}"
        arrays[key] = _to_little_endian(obj)
        return {_ARRAY_REF: key}
    if isinstance(obj, dict):
        return {str(k): _flatten(v, arrays) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_flatten(v, arrays) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _restore(obj, arrays):
    if isinstance(obj, dict):
        if set(obj) == {_ARRAY_REF}:
            return np.array(arrays[obj[_ARRAY_REF]])
        return {k: _restore(v, arrays) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v, arrays) for v in obj]
    return obj


def bundle_to_bytes(bundle: ModelBundle) -> bytes:
    arrays: dict[str, np.ndarray] = {}
    manifest = {
        "format_version": bundle.format_version,
        "provenance": _flatten(bundle.provenance, arrays),
        "routes": {
            name: _flatten(
                {
                    "grains": r.grains,
                    "schema": r.schema,
                    "fitted_columns": r.fitted_columns,
                    "blocks": r.blocks,
                    "learner": r.learner,
                    "learner_state": r.learner_state,
                    "classes": [float(c) for c in r.classes],
                },
                arrays,
            )
            for name, r in bundle.routes.items()
        },
    }
    text = json.dumps(manifest, sort_keys=True, ensure_ascii=False)
    arrays[MANIFEST_KEY] = np.frombuffer(text.encode("utf-8"), dtype=np.uint8)
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", compression=zipfile.ZIP_STORED) as archive:
        for name in sorted(arrays):
            info = zipfile.ZipInfo(f"{name}.npy", date_time=_ZIP_DATE_TIME)
            with archive.open(info, "w", force_zip64=True) as entry:
                np.lib.format.write_array(entry, arrays[name], allow_pickle=False)
    return buffer.getvalue()


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    """写出模型包"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(bundle_to_bytes(bundle))
    logger.info(f"模型包已保存: {path} (路由 {list(bundle.routes)})")


def load_bundle(path: str | Path) -> ModelBundle:
    """
    读取模型包

    Raises:
        BundleFormatError: 文件无法解析、缺少清单或版本不受支持
    """
    path = Path(path)
    if not path.exists():
        raise BundleFormatError(f"模型包不存在: {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            arrays = {k: data[k] for k in data.files}
    except (OSError, ValueError, EOFError, zipfile.BadZipFile) as e:
        raise BundleFormatError(f"无法读取模型包 {path}: {e}") from None
    if MANIFEST_KEY not in arrays:
        raise BundleFormatError(f"模型包缺少清单: {path}")
    manifest = json.loads(arrays.pop(MANIFEST_KEY).tobytes().decode("utf-8"))
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise BundleFormatError(f"不支持的模型包版本: {version}（当前版本 {FORMAT_VERSION}）")

    routes = {}
    for name, raw in manifest["routes"].items():
        r = _restore(raw, arrays)
        if r["learner"] == "gbdt" and len(r["schema"]) != int(r["learner_state"]["n_features"]):
            raise BundleFormatError(
                f"路由 {name}: 特征模式长度 {len(r['schema'])} 与模型输入维度不一致"
            )
        routes[name] = RouteBundle(
            grains=r["grains"],
            schema=r["schema"],
            fitted_columns=r["fitted_columns"],
            blocks=r["blocks"],
            learner=r["learner"],
            learner_state=r["learner_state"],
            classes=r["classes"],
        )
    return ModelBundle(
        routes=routes,
        provenance=_restore(manifest["provenance"], arrays),
        format_version=version,
    )
