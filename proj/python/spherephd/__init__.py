"""Icosahedral spherical images: mesh, index tables, projections, area irregularity and file formats."""

from ._spherephd import (
    FormatError,
    Mesh,
    SpherePhdError,
    conv_table,
    effective_areas,
    erp_to_sphd,
    irregularity,
    pixel_count,
    pool_table,
    random_rotation,
    read_sphi,
    run_cli,
    sphd_to_erp,
    verify_tables,
    vertex_count,
    write_sphi,
)

__all__ = [
    "FormatError",
    "Mesh",
    "SpherePhdError",
    "conv_table",
    "effective_areas",
    "erp_to_sphd",
    "irregularity",
    "pixel_count",
    "pool_table",
    "random_rotation",
    "read_sphi",
    "run_cli",
    "sphd_to_erp",
    "verify_tables",
    "vertex_count",
    "write_sphi",
]
