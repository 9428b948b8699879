"""Catalog ingestion from SQLite and schema-context rendering."""

import sqlite3
from pathlib import Path

import pytest

from sqlscout.core.catalog import attach_descriptions, load_catalog
from sqlscout.core.render import render_schema_context
from sqlscout.errors import IngestionError


def test_tables_and_columns_read(restaurant_catalog):
    names = [t.name for t in restaurant_catalog.tables]
    assert names == ["generalinfo", "location"]
    info = restaurant_catalog.table("generalinfo")
    assert [c.name for c in info.columns] == [
        "id_restaurant", "label", "food_type", "city", "review",
    ]
    assert info.column("id_restaurant").primary_key
    assert info.column("id_restaurant").not_null
    assert not info.column("label").not_null


def test_foreign_keys_read(restaurant_catalog):
    fks = restaurant_catalog.foreign_keys
    assert len(fks) == 1
    fk = fks[0]
    assert fk.table == "location"
    assert fk.columns == ("id_restaurant",)
    assert fk.ref_table == "generalinfo"
    assert fk.ref_columns == ("id_restaurant",)


def test_value_examples_attached(restaurant_catalog):
    food = restaurant_catalog.table("generalinfo").column("food_type")
    assert food.value_examples  # distinct sample, capped
    assert len(food.value_examples) <= 3
    assert all(isinstance(v, str) for v in food.value_examples)


def test_text_columns_listed(restaurant_catalog):
    cols = {(t, c) for t, c in restaurant_catalog.text_columns()}
    assert ("generalinfo", "food_type") in cols
    assert ("location", "street_name") in cols
    assert ("generalinfo", "review") not in cols  # REAL column


def test_lookup_is_case_insensitive(restaurant_catalog):
    assert restaurant_catalog.table("GENERALINFO").name == "generalinfo"
    assert (
        restaurant_catalog.table("generalinfo").column("Food_Type").name
        == "food_type"
    )


def test_missing_database_raises(tmp_path):
    with pytest.raises(IngestionError):
        load_catalog(tmp_path / "absent.sqlite")


def test_descriptions_merge(restaurant_db, tmp_path):
    catalog = load_catalog(restaurant_db, db_id="restaurants")
    desc_dir = tmp_path / "database_description"
    desc_dir.mkdir()
    (desc_dir / "generalinfo.csv").write_text(
        "original_column_name,column_description,value_description\n"
        "food_type,the cuisine offered,\n"
        "review,,score from 1 to 5\n",
        encoding="utf-8",
    )
    attach_descriptions(catalog, desc_dir)
    info = catalog.table("generalinfo")
    assert "cuisine" in info.column("food_type").description
    assert "score from 1 to 5" in info.column("review").description
    assert info.column("label").description == ""


def test_render_full_schema(restaurant_catalog):
    text = render_schema_context(restaurant_catalog)
    assert "CREATE TABLE generalinfo" in text
    assert "CREATE TABLE location" in text
    assert "foreign key (id_restaurant) references generalinfo" in text
    # value examples from the catalog appear as trailing comments
    assert "-- Value Examples:" in text
    assert "'thai'" in text


def test_render_selected_subset_keeps_keys(restaurant_catalog):
    # selecting a non-key column still pulls in the primary key
    text = render_schema_context(
        restaurant_catalog, selected={"generalinfo": ["food_type"]}
    )
    assert "CREATE TABLE generalinfo" in text
    assert "food_type" in text
    assert "id_restaurant" in text  # primary key retained
    assert "CREATE TABLE location" not in text
    assert "review" not in text


def test_render_selection_is_case_insensitive(restaurant_catalog):
    text = render_schema_context(
        restaurant_catalog, selected={"GeneralInfo": ["FOOD_TYPE"]}
    )
    assert "food_type" in text


def test_render_merges_retrieved_values(restaurant_catalog):
    retrieved = {("generalinfo", "city"): ["san leandro", "albany"]}
    text = render_schema_context(restaurant_catalog, retrieved_values=retrieved)
    assert "'san leandro'" in text
    line = next(l for l in text.splitlines() if "'san leandro'" in l)
    # retrieved values come before the catalog samples, deduplicated
    assert line.index("san leandro") < line.index("berkeley")
    assert line.count("'albany'") == 1


def test_render_quotes_odd_identifiers(tmp_path):
    db = tmp_path / "odd.sqlite"
    conn = sqlite3.connect(db)
    conn.execute('CREATE TABLE "order items" (id INTEGER PRIMARY KEY, "unit price" REAL)')
    conn.commit()
    conn.close()
    text = render_schema_context(load_catalog(db))
    assert "`order items`" in text
    assert "`unit price`" in text
