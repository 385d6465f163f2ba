"""crewdca: desk-scale branch-and-price crew pairing solver with dynamic
constraint aggregation, seeded by a learned flight-connection predictor."""

__version__ = "0.1.0"
