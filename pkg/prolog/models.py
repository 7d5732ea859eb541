from django.core.validators import MinValueValidator
from django.db import models


class BenchRun(models.Model):
    """Запуск bench: запрос, число повторений и семантика флага."""

    SEMANTICS_CHOICES = [
        ("calling", "M:G задаёт контекст вызова"),
        ("lookup", "M:G задаёт только контекст поиска"),
    ]

    query = models.TextField(verbose_name="Запрос")
    sources = models.TextField(blank=True, verbose_name="Файлы программы")
    repetitions = models.PositiveIntegerField(
        validators=[MinValueValidator(1)], verbose_name="Повторений"
    )
    semantics = models.CharField(
        max_length=10, choices=SEMANTICS_CHOICES, default="calling", verbose_name="Семантика"
    )
    created_at = models.DateTimeField(auto_now_add=True, verbose_name="Дата запуска")

    class Meta:
        verbose_name = "Запуск bench"
        verbose_name_plural = "Запуски bench"
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.query} x{self.repetitions} ({self.semantics})"

    @property
    def fastest(self):
        """Вариант с наименьшей медианой."""
        return self.timings.order_by("median_seconds").first()


class BenchTiming(models.Model):
    """Медианное время одного варианта программы."""

    VARIANT_CHOICES = [
        ("runtime", "Распространение при исполнении"),
        ("expanded", "Расширение при загрузке"),
        ("specialized", "Специализация"),
        ("univ", "call/N через =../2"),
    ]

    run = models.ForeignKey(
        BenchRun,
        on_delete=models.CASCADE,
        related_name="timings",
        verbose_name="Запуск",
    )
    variant = models.CharField(max_length=12, choices=VARIANT_CHOICES, verbose_name="Вариант")
    median_seconds = models.FloatField(verbose_name="Медиана (с)")
    solutions = models.PositiveIntegerField(default=0, verbose_name="Решений")

    class Meta:
        verbose_name = "Время варианта"
        verbose_name_plural = "Времена вариантов"
        unique_together = ["run", "variant"]
        ordering = ["run", "median_seconds"]

    def __str__(self):
        return f"{self.get_variant_display()}: {self.median_seconds * 1000:.3f} ms"
