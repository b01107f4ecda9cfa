import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Iterable, List, Literal, Optional, Tuple, Type

from pydantic import ValidationError

from cfmargin.exceptions import RecordError
from cfmargin.formats.native import canonical
from cfmargin.schemas.records import ResultRow

logger = logging.getLogger(__name__)

ResultFormat = Literal['csv', 'structured']
SUFFIXES = {'csv': '.csv', 'structured': '.jsonl'}


def cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return f'{value:.9g}'
    return str(value)


def _sortable(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return (1, 0)
    return (0, value)


class BaseDAO:
    """
    Result files of one row schema. ``order_by`` names the columns rows are sorted on before
    writing, so the same rows always produce the same bytes.
    """

    model: Type[ResultRow] = None
    stem: str = None
    order_by: Tuple[str, ...] = ()

    @classmethod
    def columns(cls) -> List[str]:
        return list(cls.model.model_fields)

    @classmethod
    def path(cls, out_dir: Path, fmt: ResultFormat = 'csv', stem: Optional[str] = None) -> Path:
        return Path(out_dir) / f'{stem or cls.stem}{SUFFIXES[fmt]}'

    @classmethod
    def sorted_rows(cls, rows: Iterable[ResultRow]) -> List[ResultRow]:
        return sorted(rows, key=lambda r: tuple(_sortable(getattr(r, f)) for f in cls.order_by))

    @classmethod
    def dumps(cls, rows: Iterable[ResultRow], fmt: ResultFormat = 'csv') -> bytes:
        rows = cls.sorted_rows(rows)
        if fmt == 'structured':
            lines = [json.dumps(canonical(r.model_dump(mode='json')), separators=(',', ':')) for r in rows]
            return ''.join(line + '\n' for line in lines).encode()
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(cls.columns())
        for row in rows:
            writer.writerow([cell(getattr(row, name)) for name in cls.columns()])
        return buffer.getvalue().encode()

    @classmethod
    def write(cls, out_dir: Path, rows: Iterable[ResultRow], fmt: ResultFormat = 'csv',
              stem: Optional[str] = None) -> Path:
        path = cls.path(out_dir, fmt, stem)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(cls.dumps(rows, fmt))
        except OSError as e:
            logger.error(f'Cannot write {cls.model.__name__} rows to {path}', exc_info=True)
            raise RecordError(f'cannot write {path}: {e.strerror or e}') from e
        logger.info(f'wrote {path}')
        return path

    @classmethod
    def loads(cls, data: bytes, fmt: ResultFormat = 'csv') -> List[ResultRow]:
        text = data.decode('utf-8')
        if fmt == 'structured':
            return [cls.model.model_validate_json(line) for line in text.splitlines() if line.strip()]
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames != cls.columns():
            raise RecordError(f'{cls.model.__name__}: expected columns {cls.columns()}, got {reader.fieldnames}')
        rows = []
        for raw in reader:
            values = {
                name: None if value == '' and cls.model.model_fields[name].default is None else value
                for name, value in raw.items()
            }
            rows.append(cls.model.model_validate(values))
        return rows

    @classmethod
    def read(cls, path: Path) -> List[ResultRow]:
        path = Path(path)
        fmt: ResultFormat = 'structured' if path.suffix == SUFFIXES['structured'] else 'csv'
        try:
            return cls.loads(path.read_bytes(), fmt)
        except OSError as e:
            logger.error(f'Cannot read {path}', exc_info=True)
            raise RecordError(f'cannot read {path}: {e.strerror or e}') from e
        except (UnicodeDecodeError, ValidationError, ValueError) as e:
            logger.error(f'Malformed {cls.model.__name__} rows in {path}')
            raise RecordError(f'malformed {path}: {e}') from e

    @classmethod
    def find(cls, out_dir: Path, stem: Optional[str] = None) -> Optional[Path]:
        """The existing file for this stem in either format, CSV first."""
        for fmt in ('csv', 'structured'):
            path = cls.path(out_dir, fmt, stem)
            if path.exists():
                return path
        return None
