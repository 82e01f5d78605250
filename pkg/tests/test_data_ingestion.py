import io

import pandas as pd
import pytest

from app.exceptions import DatasetError, UTDomainError
from app.data_ingestion.service import parse_bytes, parse_dataset, parse_text, resolve_path
from app.data_ingestion.utils import extension_of


def test_builtin_risk73(risk73):
    assert risk73.n == 73
    assert min(risk73.values) == 0.0020000003
    assert max(risk73.values) == 0.9755000305
    assert risk73.skipped == 2
    assert risk73.comments == 2
    assert risk73.path == "risk73"


def test_builtin_keeps_file_order(risk73):
    assert risk73.values[:3] == [0.0278999962, 0.0607999924, 0.0215000095]
    assert risk73.sorted_values[0] == 0.0020000003
    s = risk73.to_sample()
    assert s.original == tuple(risk73.values)


def test_comment_line_counts():
    result = parse_text("0.2 0.4\n# note\n0.6")
    assert result.values == [0.2, 0.4, 0.6]
    assert result.skipped == 0
    assert result.comments == 1


def test_mixed_separators_and_inline_comment():
    result = parse_text("0.1, 0.2;0.3\n0.4\t- 0.5 # trailing note 0.9\n")
    assert result.values == [0.1, 0.2, 0.3, 0.4, 0.5]
    assert result.skipped == 1
    assert result.comments == 1


def test_out_of_support_value_names_token_and_position():
    with pytest.raises(DatasetError) as info:
        parse_text("0.2 0.3\n0.4 1.5")
    err = info.value
    assert err.token == "1.5"
    assert err.line == 2
    assert err.column == 5
    assert "1.5" in str(err)
    assert isinstance(err, UTDomainError)


@pytest.mark.parametrize("text", ["0.2 abc", "0.2 nan", "0.2 1,5e", "0.2 0"])
def test_bad_tokens_are_rejected(text):
    with pytest.raises(DatasetError):
        parse_text(text)


@pytest.mark.parametrize("text", ["", "# only a comment\n", "- -\n"])
def test_empty_input_is_an_error(text):
    with pytest.raises(DatasetError):
        parse_text(text)


def test_csv_table_bytes():
    contents = b"0.1,0.2,0.3\n0.4,-,0.5\n"
    result = parse_bytes(contents, "obs.csv")
    assert result.values == [0.1, 0.2, 0.3, 0.4, 0.5]
    assert result.skipped == 1


def test_xlsx_table_bytes():
    buffer = io.BytesIO()
    pd.DataFrame([[0.11, 0.22], [0.33, None]]).to_excel(buffer, header=False, index=False, engine="openpyxl")
    result = parse_bytes(buffer.getvalue(), "obs.xlsx")
    assert result.values == [0.11, 0.22, 0.33]


def test_table_cell_outside_support():
    with pytest.raises(DatasetError) as info:
        parse_bytes(b"0.1,0.2\n0.3,2.0\n", "obs.csv")
    assert info.value.line == 2
    assert info.value.column == 2


def test_text_must_be_utf8():
    with pytest.raises(DatasetError):
        parse_bytes(b"\xff\xfe0.1", "obs.txt")


def test_dataset_file_from_disk(tmp_path):
    path = tmp_path / "obs.txt"
    path.write_text("0.25 0.5\n0.75\n", encoding="utf-8")
    result = parse_dataset(path)
    assert result.n == 3
    assert result.path == str(path)


def test_missing_dataset():
    with pytest.raises(DatasetError):
        parse_dataset("no/such/file.txt")


def test_resolve_and_extension():
    assert resolve_path("risk73").name == "risk73.txt"
    assert extension_of("Obs.XLSX") == ".xlsx"
    assert extension_of("noext") == ""
