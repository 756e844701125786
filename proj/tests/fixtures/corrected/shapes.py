from typing import Self


class Shape:
  def move(self, dist: int) -> Self:
    self.position += dist
    return self

class Circle(Shape):
  pass

Circle().move(4)
