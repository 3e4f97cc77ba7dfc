"""Commands working with image files: `partition`, `stitch` and `enhance`."""
from pathlib import Path

import click

from ..domain import AllocationRatio
from ..imaging import (
    DEFAULT_GRID_SIDE,
    DEFAULT_OVERLAP,
    build_placements,
    encode_image,
    hybrid_enhance,
    load_manifest,
    mask_iou,
    rasterize_foreground,
    read_image,
    select_foreground,
    stitch,
)
from ._output import atomic_write, handle_errors, write_csv

VARIANCE_COLUMNS = ("cell", "variance", "foreground")

_grid_option = click.option(
    "--grid",
    "grid_side",
    type=click.IntRange(min=1),
    default=DEFAULT_GRID_SIDE,
    show_default=True,
    help="Number of grid cells per side.",
)
_gamma_option = click.option(
    "--gamma",
    type=float,
    default=0.25,
    show_default=True,
    help="Fraction of cells routed to the foreground.",
)


@click.command(short_help="Split an image into foreground and background cells")
@click.argument("image_path", type=click.Path(path_type=Path))
@_grid_option
@_gamma_option
@click.option(
    "--reference",
    type=click.Path(path_type=Path),
    help="Reference PGM mask to report the intersection over union with.",
)
@click.option(
    "--threshold",
    type=click.FloatRange(0, 1),
    default=0.5,
    show_default=True,
    help="Binarization threshold of the reference mask.",
)
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    default="out",
    show_default=True,
    help="Output directory.",
)
def partition(image_path, grid_side, gamma, reference, threshold, out):
    """
    Rank grid cells by variance and write the foreground mask.

    Writes mask.pgm, white over the foreground cells, and variances.csv.

    Examples:

    \b
    hybridsr partition image.ppm --grid 4 --gamma 0.25
    hybridsr partition image.ppm --reference sam_mask.pgm
    """
    from ._rich import print_pairs, print_table

    with handle_errors():
        result = select_foreground(read_image(image_path), grid_side, AllocationRatio(gamma))
        rows = [
            {
                "cell": i,
                "variance": f"{v:.6f}",
                "foreground": "true" if i in result.foreground else "false",
            }
            for i, v in enumerate(result.variances)
        ]
        write_csv(out / "variances.csv", VARIANCE_COLUMNS, rows)
        atomic_write(out / "mask.pgm", encode_image(rasterize_foreground(result).astype(float)))
        print_table("variances", VARIANCE_COLUMNS, rows)
        pairs = {"Foreground": ",".join(str(i) for i in sorted(result.foreground))}
        if reference is not None:
            pairs["IoU"] = f"{mask_iou(result, read_image(reference), threshold):.4f}"
        print_pairs(pairs)


@click.command("stitch", short_help="Stitch placed patches into an image")
@click.argument("manifest_path", type=click.Path(path_type=Path))
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default="out/stitched.ppm",
    show_default=True,
    help="Output image file.",
)
def stitch_(manifest_path, out):
    """
    Stitch the patches listed in a JSON manifest with weighted overlap-add.

    Image paths in the manifest are relative to its directory.

    \b
    {
      "canvas": {"width": 64, "height": 32},
      "placements": [
        {"image": "left.ppm", "x": 0, "y": 0, "feather": {"band": 8, "sides": ["right"]}},
        {"image": "right.ppm", "x": 24, "y": 0, "weights": "right_weights.pgm"}
      ]
    }
    """
    with handle_errors():
        manifest = load_manifest(manifest_path)
        placements = build_placements(manifest, manifest_path.parent)
        image = stitch(placements, manifest.width, manifest.height)
        atomic_write(out, encode_image(image))
    click.echo(f"Stitched {len(placements)} patches into {out}")


@click.command(short_help="Upscale an image with the hybrid enhancers")
@click.argument("image_path", type=click.Path(path_type=Path))
@click.option(
    "--scale",
    type=click.IntRange(min=1),
    default=2,
    show_default=True,
    help="Upscaling factor.",
)
@_gamma_option
@click.option(
    "--overlap",
    type=click.IntRange(min=0),
    default=DEFAULT_OVERLAP,
    show_default=True,
    help="Patch expansion on each side shared with a neighbor, pixels.",
)
@_grid_option
@click.option(
    "--workers",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="Number of threads enhancing patches.",
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default="out/enhanced.ppm",
    show_default=True,
    help="Output image file.",
)
def enhance(image_path, scale, gamma, overlap, grid_side, workers, out):
    """
    Upscale an image patch-wise and stitch the patches back.

    High-variance cells go to the bilinear branch, the others to the nearest neighbor branch.

    Examples:

    \b
    hybridsr enhance image.ppm --scale 2 --gamma 0.25 --out enhanced.ppm
    """
    with handle_errors():
        image = read_image(image_path)
        gamma = AllocationRatio(gamma)
        enhanced = hybrid_enhance(image, grid_side, gamma, scale, overlap, workers)
        atomic_write(out, encode_image(enhanced))
    height, width = enhanced.shape[:2]
    click.echo(f"Enhanced {image.shape[1]}x{image.shape[0]} to {width}x{height} into {out}")
