"""
异常定义
DataError 及其子类在 CLI 中映射为退出码 2
"""


class TsfexError(Exception):
    """tsfex 异常基类"""


class ConfigError(TsfexError):
    """配置文件中存在未知的节或键、或取值无法解析（CLI 中视为用法错误）"""


class DataError(TsfexError):
    """输入数据错误（文件格式、标签、模型包等）"""


class EventParseError(DataError):
    """事件文件解析失败，携带出错行号"""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"第 {line_no} 行: {message}"
        super().__init__(message)


class SchemaMismatchError(DataError):
    """特征列与模型包中的特征模式不一致"""

    def __init__(self, missing: list[str], extra: list[str]):
        self.missing = list(missing)
        self.extra = list(extra)
        parts = []
        if self.missing:
            parts.append(f"缺少特征: {', '.join(self.missing[:10])}")
        if self.extra:
            parts.append(f"多余特征: {', '.join(self.extra[:10])}")
        super().__init__("特征模式不匹配 - " + "; ".join(parts))


class LabelError(DataError):
    """标签缺失或类别不完整"""


class BundleFormatError(DataError):
    """模型包格式或版本无法识别"""
