from encoding.context import EncodingContext
from models.base_model import SystemModel, parse_box


class IdentityModel(SystemModel):
    """No dynamics: every bounded PWL trace is in L(M). Pure satisfiability of φ."""

    kind = "identity"

    def encode(self, ctx: EncodingContext):
        self.encode_initial_box(ctx)

    @classmethod
    def from_dict(cls, data: dict) -> "IdentityModel":
        return cls(
            data.get("name", "identity"),
            parse_box(data.get("variables"), "variables"),
            parse_box(data.get("initial"), "initial"),
        )
