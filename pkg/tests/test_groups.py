import numpy as np
import pytest

from groupdrift import Sample
from groupdrift.core import GroupSpecError
from groupdrift.groups import label_column, parse_group_spec

XYZ = ["x", "y", "z"]
S = Sample(np.zeros((4, 3)), XYZ)
LABELS = {"day": ["0", "0", "1", "1"]}


def test_builtin_forms():
    assert parse_group_spec("features", S).names == XYZ
    assert parse_group_spec("rows:day", S, LABELS).names == ["0", "1"]
    cross = parse_group_spec("features*rows:day", S, LABELS)
    assert len(cross) == 6 and cross.names[0] == "x@0"
    assert label_column("features*rows:day") == "day" and label_column("features") is None


def test_errors():
    with pytest.raises(GroupSpecError, match="not loaded"):
        parse_group_spec("rows:week", S, LABELS)
    with pytest.raises(GroupSpecError, match="bad group spec"):
        parse_group_spec("cells", S)
    with pytest.raises(GroupSpecError, match="labels for 4 rows"):
        parse_group_spec("rows:day", S, {"day": ["0"]})


def test_group_file(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("name,rows,features\n# comment\nearly,0-1,*\nlate_x,2-3,x\nlate_yz,2;3,y;z\n")
    spec = parse_group_spec(str(path), S)
    assert spec.names == ["early", "late_x", "late_yz"]
    assert spec.owner.tolist() == [[0, 0, 0], [0, 0, 0], [1, 2, 2], [1, 2, 2]]
    path.write_text("name,rows,features\na,0-2,*\n")
    with pytest.raises(GroupSpecError, match="cover"):
        parse_group_spec(str(path), S)
    path.write_text("name,rows,features\na,*,w\n")
    with pytest.raises(GroupSpecError, match="unknown feature"):
        parse_group_spec(str(path), S)
    path.write_text("group,rows\n")
    with pytest.raises(GroupSpecError, match="header"):
        parse_group_spec(str(path), S)
