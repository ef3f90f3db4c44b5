"""
CLI 模块
"""

import logging
from dataclasses import replace
from pathlib import Path

import click

from tsfex_core import __version__
from tsfex_core.config import PipelineConfig, load_config
from tsfex_core.exceptions import ConfigError, DataError
from tsfex_core.experiments import APPROACHES, cmd_compare
from tsfex_core.pipeline import cmd_featurize, cmd_predict, cmd_score, cmd_train, cmd_tune
from tsfex_core.synthetic import cmd_gen

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger(__name__)


def _setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)


@click.group()
@click.version_option(version=__version__)
@click.option("--config", "config_path", type=click.Path(), default=None, help="INI 配置文件")
@click.option("--seed", type=int, default=None, help="覆盖配置中的全局种子")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="覆盖输出目录")
@click.option("--verbose", is_flag=True, help="输出 DEBUG 日志")
@click.pass_context
def cli(ctx: click.Context, config_path, seed, out_dir, verbose):
    """tsfex: 基于 BLE 与 IMU 时间序列特征的接触距离分类"""
    _setup_logging(verbose)
    config = load_config(config_path)
    if seed is not None:
        config = config.with_seed(seed)
    if out_dir is not None:
        config = replace(config, paths=replace(config.paths, out=out_dir))
    ctx.obj = config


def _out(config: PipelineConfig) -> Path:
    return Path(config.paths.out)


@cli.command()
@click.option("--data", "data_dir", type=click.Path(), default=None, help="语料输出目录")
@click.option("--n-events", type=int, default=None, help="事件数")
@click.option("--sd", "rssi_sd_db", type=float, default=None, help="RSSI 噪声标准差 (dB)")
@click.pass_obj
def gen(config: PipelineConfig, data_dir, n_events, rssi_sd_db):
    """生成合成语料（事件文件 + key.csv）"""
    overrides = {}
    if n_events is not None:
        overrides["n_events"] = n_events
    if rssi_sd_db is not None:
        overrides["rssi_sd_db"] = rssi_sd_db
    try:
        spec = replace(config.synthetic, **overrides)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    target = data_dir or config.paths.data_dir
    key = cmd_gen(spec, target, n_jobs=config.n_jobs)
    click.echo(f"已生成 {len(key)} 个事件 -> {target}")


@cli.command()
@click.option("--data", "data_dir", type=click.Path(), default=None, help="事件文件目录")
@click.pass_obj
def featurize(config: PipelineConfig, data_dir):
    """拟合特征流程并写出特征矩阵"""
    matrices = cmd_featurize(config, data_dir or config.paths.data_dir, _out(config))
    for route, matrix in matrices.items():
        click.echo(f"{route}: {matrix.shape[0]} 行 × {matrix.shape[1]} 列")


@cli.command()
@click.option("--features", "features_dir", type=click.Path(), default=None, help="特征矩阵目录")
@click.option("--key", "key_path", type=click.Path(), default=None, help="标签文件")
@click.option("--bundle", "bundle_path", type=click.Path(), default=None, help="模型包输出路径")
@click.pass_obj
def train(config: PipelineConfig, features_dir, key_path, bundle_path):
    """训练各路由模型并保存模型包"""
    _, report = cmd_train(
        config,
        features_dir or _out(config),
        key_path or config.paths.key_file,
        bundle_path or config.paths.bundle,
    )
    click.echo(report.to_frame().to_string(index=False))


@cli.command()
@click.option("--features", "features_dir", type=click.Path(), default=None, help="特征矩阵目录")
@click.option("--key", "key_path", type=click.Path(), default=None, help="标签文件")
@click.pass_obj
def tune(config: PipelineConfig, features_dir, key_path):
    """贝叶斯优化调参，写出调参历史与 tuned.ini"""
    _, results = cmd_tune(
        config, features_dir or _out(config), key_path or config.paths.key_file, _out(config)
    )
    for route, result in results.items():
        click.echo(f"{route}: 最优 nDCF {result.best.objective:.4f} 参数 {result.best.params}")


@cli.command()
@click.option("--bundle", "bundle_path", type=click.Path(), default=None, help="模型包")
@click.option("--data", "data_dir", type=click.Path(), default=None, help="事件文件目录")
@click.pass_obj
def predict(config: PipelineConfig, bundle_path, data_dir):
    """预测距离，写出 predictions.csv"""
    target = _out(config) / "predictions.csv"
    frame = cmd_predict(
        config, bundle_path or config.paths.bundle, data_dir or config.paths.data_dir, target
    )
    click.echo(f"已预测 {len(frame)} 个事件 -> {target}")


@cli.command()
@click.option("--predictions", "predictions_path", type=click.Path(), default=None)
@click.option("--key", "key_path", type=click.Path(), default=None, help="标签文件")
@click.pass_obj
def score(config: PipelineConfig, predictions_path, key_path):
    """按 nDCF 评分，写出 report.txt 与 report.csv"""
    report = cmd_score(
        predictions_path or _out(config) / "predictions.csv",
        key_path or config.paths.key_file,
        _out(config),
        config.evaluation,
    )
    click.echo(report.to_text(), nl=False)


@cli.command()
@click.option("--data", "data_dir", type=click.Path(), default=None, help="事件文件目录")
@click.option("--key", "key_path", type=click.Path(), default=None, help="标签文件")
@click.option(
    "--approach",
    "approaches",
    multiple=True,
    type=click.Choice(APPROACHES),
    help="参与对比的方案，可重复；默认全部",
)
@click.pass_obj
def compare(config: PipelineConfig, data_dir, key_path, approaches):
    """在同一划分上对比各特征方案"""
    table = cmd_compare(
        config,
        data_dir or config.paths.data_dir,
        key_path or config.paths.key_file,
        _out(config),
        approaches or APPROACHES,
    )
    click.echo(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))


def main(argv: list[str] | None = None) -> int:
    """
    入口

    退出码：0 成功，1 用法或配置错误，2 数据错误
    """
    try:
        cli.main(args=argv, prog_name="tsfex", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except ConfigError as e:
        click.echo(f"配置错误: {e}", err=True)
        return 1
    except DataError as e:
        click.echo(f"数据错误: {e}", err=True)
        return 2
    except click.Abort:
        click.echo("已中止", err=True)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
